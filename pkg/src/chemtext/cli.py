"""Command-line entry point.

Subcommands::

    chemtext corpus dedup     --in docs.jsonl --out kept.jsonl
    chemtext corpus segment   --in tokens.jsonl --out batches.bin [--max-seq-len N]
    chemtext tokenizer train  --in docs.jsonl --out model.json --vocab-size N
    chemtext tokenizer encode --in docs.jsonl --model model.json --out tokens.jsonl
    chemtext tokenizer decode --in tokens.jsonl --model model.json --out texts.jsonl
    chemtext instruct build   --kind chemdner|pubchem --in records --out examples.jsonl
    chemtext instruct split   --in examples.jsonl --out-dir DIR [--train/--val/--test]
    chemtext bench run        --task mmlu|CEE|... --data PATH --endpoint URL --out run.json
    chemtext bench score      --pred preds.jsonl --gold gold.jsonl [--task T] [--schema S]
    chemtext bench report     --runs a.json b.json [--baseline a.json] [--out-dir DIR]

Exit codes: 0 success; 1 validation error (bad flags, bad inputs); 2 runtime
failure (endpoint trouble, invalid run).  Logs go to standard error; data
goes to files.

Option values resolve as CLI flag > config file > built-in default.  The
``--config`` file is flat ``key = value`` text: one option per line, keys
are long option names with dashes replaced by underscores, ``#`` starts a
comment.  Paths and other per-invocation arguments are CLI-only.

Every artifact embeds (directly for JSON artifacts, via a ``.meta.json``
sidecar for JSONL/binary ones) the fully resolved run configuration that
produced it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Mapping, Sequence

from chemtext import __version__
from chemtext._jsonio import dump_json, read_jsonl, write_jsonl
from chemtext.errors import RunFailure, ValidationError

logger = logging.getLogger("chemtext.cli")

_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract here is
    usage text plus exit 1, routed through the normal validation path."""

    def error(self, message: str):  # noqa: D401 (argparse API)
        self.print_usage(sys.stderr)
        raise ValidationError(message)


# =============================================================================
# Defaults, config file, precedence
# =============================================================================

_GLOBAL_DEFAULTS: dict[str, object] = {"seed": 0, "threads": 4, "log_level": "INFO"}

_COMMAND_DEFAULTS: dict[str, dict[str, object]] = {
    "corpus dedup": {},
    "corpus segment": {"max_seq_len": 1024},
    "tokenizer train": {"vocab_size": None},
    "tokenizer encode": {},
    "tokenizer decode": {},
    "instruct build": {},
    "instruct split": {"train": 0.8, "val": 0.1, "test": 0.1},
    "bench run": {
        "endpoint": None,
        "shots": 0,
        "model_id": "unknown",
        "mcq_mode": "logprobs",
        "max_retries": 2,
        "temperature": 0.0,
        "max_failure_rate": 0.1,
        "max_new_tokens_mcq": 16,
        "max_new_tokens_list": 64,
        "max_new_tokens_isg": 256,
        "timeout": 60.0,
        "generations": None,
    },
    "bench score": {"task": None, "schema": "both"},
    "bench report": {"subsets": "default", "out_dir": "report"},
}


def _size(text: str) -> int | float:
    """Split sizes: a bare integer is a record count, anything with a
    decimal point or exponent is a fraction."""
    return float(text) if any(c in text for c in ".eE") else int(text)


_COERCERS: dict[str, object] = {
    "seed": int,
    "threads": int,
    "log_level": str,
    "max_seq_len": int,
    "vocab_size": int,
    "train": _size,
    "val": _size,
    "test": _size,
    "endpoint": str,
    "shots": int,
    "model_id": str,
    "mcq_mode": str,
    "max_retries": int,
    "temperature": float,
    "max_failure_rate": float,
    "max_new_tokens_mcq": int,
    "max_new_tokens_list": int,
    "max_new_tokens_isg": int,
    "timeout": float,
    "generations": str,
    "task": str,
    "schema": str,
    "subsets": str,
    "out_dir": str,
}


def _read_config_file(path: str) -> dict[str, str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        entries[key] = value.strip()
    return entries


def _effective_params(command: str, namespace: argparse.Namespace) -> dict:
    """Resolve option values: CLI flag > config file > built-in default."""
    defaults = {**_GLOBAL_DEFAULTS, **_COMMAND_DEFAULTS[command]}
    params = dict(defaults)
    config_path = getattr(namespace, "config", None)
    if config_path is not None:
        for key, raw in _read_config_file(config_path).items():
            if key not in defaults:
                raise ValidationError(
                    f"config file: unknown key {key!r} for command '{command}'"
                )
            try:
                params[key] = _COERCERS[key](raw)
            except ValueError:
                raise ValidationError(
                    f"config file: bad value for {key!r}: {raw!r}"
                ) from None
    for key, value in vars(namespace).items():
        if key in ("func", "command", "config", "group", "action"):
            continue
        params[key] = value
    return params


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _run_config(command: str, params: Mapping) -> dict:
    return {
        "tool": "chemtext",
        "version": __version__,
        "command": command,
        "params": {key: _jsonable(value) for key, value in sorted(params.items())},
    }


# =============================================================================
# Parser
# =============================================================================


def _add_global_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("global options")
    group.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="random seed (default 0)")
    group.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                       help="worker threads / request concurrency (default 4)")
    group.add_argument("--log-level", dest="log_level", choices=_LOG_LEVELS,
                       default=argparse.SUPPRESS, help="log verbosity (default INFO)")
    group.add_argument("--config", default=argparse.SUPPRESS,
                       help="flat key=value config file (CLI flags win)")


def _arg_in(parser: argparse.ArgumentParser, help_text: str) -> None:
    parser.add_argument("--in", "--input", dest="input", required=True,
                        metavar="PATH", help=help_text)


def _arg_out(parser: argparse.ArgumentParser, help_text: str, required: bool = True) -> None:
    parser.add_argument("--out", "--output", dest="output", required=required,
                        default=None if not required else argparse.SUPPRESS,
                        metavar="PATH", help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="chemtext",
        description="Corpus preparation, tokenizer training, instruction-dataset "
        "construction, and generation-endpoint evaluation.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"chemtext {__version__}")
    _add_global_args(parser)
    top = parser.add_subparsers(dest="group", metavar="COMMAND")
    top.required = True

    def subcommand(group_parser, name: str, command: str, func, help_text: str):
        sub = group_parser.add_parser(name, help=help_text, allow_abbrev=False)
        _add_global_args(sub)
        sub.set_defaults(func=func, command=command)
        return sub

    # ---- corpus ----
    corpus = parser_group(parser, top, "corpus", "document pipeline: dedup and segmentation")
    dedup = subcommand(corpus, "dedup", "corpus dedup", _cmd_corpus_dedup,
                       "drop documents whose normalized titles collide (first wins)")
    _arg_in(dedup, "document JSONL (id, title, abstract)")
    _arg_out(dedup, "surviving documents JSONL")

    seg = subcommand(corpus, "segment", "corpus segment", _cmd_corpus_segment,
                     "pack token streams into fixed-length batches")
    _arg_in(seg, "token JSONL (id, ids)")
    _arg_out(seg, "binary token-batch file")
    seg.add_argument("--max-seq-len", dest="max_seq_len", type=int,
                     default=argparse.SUPPRESS, help="batch length (default 1024)")

    # ---- tokenizer ----
    tok = parser_group(parser, top, "tokenizer", "byte-level BPE: train, encode, decode")
    train = subcommand(tok, "train", "tokenizer train", _cmd_tokenizer_train,
                       "train a byte-level BPE vocabulary")
    _arg_in(train, "document JSONL to train on")
    _arg_out(train, "tokenizer model JSON")
    train.add_argument("--vocab-size", dest="vocab_size", type=int,
                       default=argparse.SUPPRESS, help="target vocabulary size (>= 257)")

    enc = subcommand(tok, "encode", "tokenizer encode", _cmd_tokenizer_encode,
                     "encode documents to token ids")
    _arg_in(enc, "document JSONL")
    _arg_out(enc, "token JSONL (id, ids)")
    enc.add_argument("--model", required=True, metavar="PATH", help="tokenizer model JSON")

    dec = subcommand(tok, "decode", "tokenizer decode", _cmd_tokenizer_decode,
                     "decode token ids back to text")
    _arg_in(dec, "token JSONL (id, ids)")
    _arg_out(dec, "text JSONL (id, text)")
    dec.add_argument("--model", required=True, metavar="PATH", help="tokenizer model JSON")

    # ---- instruct ----
    instruct = parser_group(parser, top, "instruct", "instruction-dataset construction")
    build = subcommand(instruct, "build", "instruct build", _cmd_instruct_build,
                       "build prompt/response examples from source records")
    build.add_argument("--kind", required=True, choices=("chemdner", "pubchem"),
                       help="source record format")
    _arg_in(build, "source records (JSONL, or TSV for annotated texts)")
    _arg_out(build, "instruction examples JSONL")

    split = subcommand(instruct, "split", "instruct split", _cmd_instruct_split,
                       "record-disjoint train/val/test split")
    _arg_in(split, "instruction examples JSONL")
    split.add_argument("--out-dir", dest="out_dir", required=True, metavar="DIR",
                       help="directory for train/val/test JSONL files")
    for part in ("train", "val", "test"):
        split.add_argument(f"--{part}", type=_size, default=argparse.SUPPRESS,
                           help=f"{part} size: integer record count or fraction "
                           f"(default {_COMMAND_DEFAULTS['instruct split'][part]})")

    # ---- bench ----
    bench = parser_group(parser, top, "bench", "evaluation runs, scoring, reports")
    run = subcommand(bench, "run", "bench run", _cmd_bench_run,
                     "evaluate an endpoint on a benchmark or instruction task")
    run.add_argument("--task", required=True,
                     help="'mmlu' or one of CEE, CER, MFG, ISG, MWE")
    run.add_argument("--data", required=True, metavar="PATH",
                     help="benchmark directory / CSV / JSONL, or instruction examples JSONL")
    run.add_argument("--dev", metavar="PATH", default=None,
                     help="dev pool for few-shot exemplars (single-file benchmarks)")
    run.add_argument("--endpoint", default=argparse.SUPPRESS, metavar="URL",
                     help="generation endpoint base URL")
    _arg_out(run, "evaluation report JSON")
    run.add_argument("--shots", type=int, default=argparse.SUPPRESS,
                     help="few-shot exemplar count (default 0)")
    run.add_argument("--model-id", dest="model_id", default=argparse.SUPPRESS,
                     help="model identifier echoed into the report")
    run.add_argument("--mcq-mode", dest="mcq_mode", choices=("logprobs", "text"),
                     default=argparse.SUPPRESS,
                     help="answer selection: per-choice likelihoods (default) or letter parsing")
    run.add_argument("--max-retries", dest="max_retries", type=int, default=argparse.SUPPRESS,
                     help="retries per item after the first attempt (default 2)")
    run.add_argument("--temperature", type=float, default=argparse.SUPPRESS,
                     help="sampling temperature (default 0)")
    run.add_argument("--max-failure-rate", dest="max_failure_rate", type=float,
                     default=argparse.SUPPRESS,
                     help="failed-item rate above which the run is invalid (default 0.1)")
    run.add_argument("--max-new-tokens-mcq", dest="max_new_tokens_mcq", type=int,
                     default=argparse.SUPPRESS, help="generation budget for MCQ (default 16)")
    run.add_argument("--max-new-tokens-list", dest="max_new_tokens_list", type=int,
                     default=argparse.SUPPRESS,
                     help="generation budget for list tasks (default 64)")
    run.add_argument("--max-new-tokens-isg", dest="max_new_tokens_isg", type=int,
                     default=argparse.SUPPRESS,
                     help="generation budget for SELFIES generation (default 256)")
    run.add_argument("--stop", action="append", default=None, metavar="TEXT",
                     help="stop sequence (repeatable; default: blank line)")
    run.add_argument("--timeout", type=float, default=argparse.SUPPRESS,
                     help="per-request timeout in seconds (default 60)")
    run.add_argument("--generations", default=argparse.SUPPRESS, metavar="PATH",
                     help="raw-generations log for crash-safe resume "
                     "(default <out>.generations.jsonl)")

    score = subcommand(bench, "score", "bench score", _cmd_bench_score,
                       "score predictions against gold examples offline")
    score.add_argument("--pred", required=True, metavar="PATH",
                       help="predictions JSONL (example_id + text, or a generations log)")
    score.add_argument("--gold", required=True, metavar="PATH",
                       help="gold instruction examples JSONL")
    score.add_argument("--task", default=argparse.SUPPRESS,
                       help="task to score (default: inferred from gold)")
    score.add_argument("--schema", choices=("constrained", "unconstrained", "both"),
                       default=argparse.SUPPRESS,
                       help="entity-matching schema to report (default both)")
    _arg_out(score, "score JSON (default: standard output)", required=False)

    report = subcommand(bench, "report", "bench report", _cmd_bench_report,
                        "render CSV summaries and figures for one or more runs")
    report.add_argument("--runs", nargs="+", required=True, metavar="RUN",
                        help="evaluation report JSON files")
    report.add_argument("--baseline", default=None, metavar="RUN",
                        help="run that improvements are measured against "
                        "(default: the first run)")
    report.add_argument("--subsets", default=argparse.SUPPRESS,
                        help="'default' or a comma-separated subset-name filter")
    report.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS,
                        metavar="DIR", help="output directory (default 'report')")

    return parser


def parser_group(parser, top, name: str, help_text: str):
    group = top.add_parser(name, help=help_text, allow_abbrev=False)
    sub = group.add_subparsers(dest="action", metavar="ACTION")
    sub.required = True
    return sub


# =============================================================================
# Commands
# =============================================================================


def _sidecar(path: str | Path, payload: dict) -> None:
    dump_json(str(path) + ".meta.json", payload)


def _cmd_corpus_dedup(params: dict, run_config: dict) -> int:
    from chemtext.corpus import deduplicate, read_documents, write_documents

    documents = list(read_documents(params["input"]))
    survivors, report = deduplicate(documents)
    write_documents(params["output"], survivors)
    _sidecar(params["output"], {"run_config": run_config, "dedup_report": report.to_dict()})
    logger.info("dedup: kept %d, dropped %d", report.kept, report.dropped)
    return 0


def _read_token_streams(path: str | Path) -> list[tuple[str, list[int]]]:
    streams: list[tuple[str, list[int]]] = []
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        if "ids" not in obj or not isinstance(obj["ids"], list):
            raise ValidationError(f"{where}: row needs an 'ids' list")
        ids = obj["ids"]
        if not all(isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in ids):
            raise ValidationError(f"{where}: token ids must be non-negative integers")
        streams.append((str(obj.get("id", lineno)), ids))
    return streams


def _cmd_corpus_segment(params: dict, run_config: dict) -> int:
    from chemtext.corpus import segment, write_token_batches

    streams = _read_token_streams(params["input"])
    batches = segment((ids for _, ids in streams), max_seq_len=params["max_seq_len"])
    meta = write_token_batches(
        params["output"], batches, max_seq_len=params["max_seq_len"], config=run_config
    )
    logger.info("segment: %d tokens into %d batches", meta["total_tokens"], meta["num_batches"])
    return 0


def _cmd_tokenizer_train(params: dict, run_config: dict) -> int:
    from chemtext.bpe import save_model, train_bpe
    from chemtext.corpus import document_text, read_documents

    if params["vocab_size"] is None:
        raise ValidationError("tokenizer train requires --vocab-size")
    texts = (document_text(doc) for doc in read_documents(params["input"]))
    model = train_bpe(texts, vocab_size=params["vocab_size"])
    save_model(model, params["output"], config=run_config)
    logger.info("trained vocabulary of %d tokens (%d merges)", len(model.vocab), len(model.merges))
    return 0


def _cmd_tokenizer_encode(params: dict, run_config: dict) -> int:
    from chemtext.bpe import load_model
    from chemtext.corpus import document_text, read_documents

    model = load_model(params["model"])
    rows = (
        {"id": doc.id, "ids": model.encode(document_text(doc))}
        for doc in read_documents(params["input"])
    )
    count = write_jsonl(params["output"], rows)
    _sidecar(params["output"], {"run_config": run_config, "num_documents": count})
    return 0


def _cmd_tokenizer_decode(params: dict, run_config: dict) -> int:
    from chemtext.bpe import load_model

    model = load_model(params["model"])
    streams = _read_token_streams(params["input"])
    rows = ({"id": stream_id, "text": model.decode(ids)} for stream_id, ids in streams)
    count = write_jsonl(params["output"], rows)
    _sidecar(params["output"], {"run_config": run_config, "num_documents": count})
    return 0


def _cmd_instruct_build(params: dict, run_config: dict) -> int:
    from chemtext.instruct import (
        build_chemdner_examples,
        build_pubchem_examples,
        read_chemdner,
        read_pubchem,
        write_examples,
    )

    if params["kind"] == "chemdner":
        examples = build_chemdner_examples(read_chemdner(params["input"]))
    else:
        examples = build_pubchem_examples(read_pubchem(params["input"]))
    if not examples:
        raise ValidationError(f"no examples produced from {params['input']}")
    count = write_examples(params["output"], examples)
    per_task: dict[str, int] = {}
    for example in examples:
        per_task[example.task] = per_task.get(example.task, 0) + 1
    _sidecar(
        params["output"],
        {"run_config": run_config, "n_examples": count, "per_task": per_task},
    )
    logger.info("built %d examples: %s", count, per_task)
    return 0


def _cmd_instruct_split(params: dict, run_config: dict) -> int:
    from chemtext.instruct import SplitSpec, read_examples, split_dataset, write_examples

    examples = list(read_examples(params["input"]))
    spec = SplitSpec(train=params["train"], val=params["val"], test=params["test"])
    split = split_dataset(examples, spec, seed=params["seed"])
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("train", "val", "test", "remainder"):
        part = getattr(split, name)
        if name == "remainder" and not part:
            continue
        write_examples(out_dir / f"{name}.jsonl", part)
    dump_json(out_dir / "split.meta.json", {"run_config": run_config, "summary": split.summary()})
    return 0


def _load_mcq_tasks(params: dict):
    from chemtext.harness import TaskData, load_mcq_csv, load_mcq_jsonl, load_mmlu_dir
    from chemtext.harness.mcq import task_name_from_filename

    data = Path(params["data"])
    if data.is_dir():
        return load_mmlu_dir(data)

    loader = load_mcq_csv if data.suffix.lower() == ".csv" else load_mcq_jsonl
    items = loader(data)
    dev_items = loader(Path(params["dev"]), None) if params.get("dev") else []

    by_task: dict[str, list] = {}
    for item in items:
        by_task.setdefault(item.task_name, []).append(item)
    dev_by_task: dict[str, list] = {}
    for item in dev_items:
        dev_by_task.setdefault(item.task_name, []).append(item)
    default_dev = dev_items if len(by_task) == 1 else []
    return [
        TaskData(
            name=name,
            items=tuple(task_items),
            dev_items=tuple(dev_by_task.get(name, default_dev)),
        )
        for name, task_items in sorted(by_task.items())
    ]


def _cmd_bench_run(params: dict, run_config: dict) -> int:
    from chemtext.harness import EvalConfig, HttpGenerationClient, instruction_eval, run_eval
    from chemtext.instruct import Task, read_examples

    if params["endpoint"] is None:
        raise ValidationError("bench run requires --endpoint")
    out = Path(params["output"])
    generations = params["generations"] or f"{out}.generations.jsonl"
    stop = tuple(params["stop"]) if params.get("stop") else ("\n\n",)
    config = EvalConfig(
        model_id=params["model_id"],
        shots=params["shots"],
        seed=params["seed"],
        concurrency=params["threads"],
        max_retries=params["max_retries"],
        temperature=params["temperature"],
        max_new_tokens_mcq=params["max_new_tokens_mcq"],
        max_new_tokens_list=params["max_new_tokens_list"],
        max_new_tokens_isg=params["max_new_tokens_isg"],
        stop_sequences=stop,
        use_logprobs=params["mcq_mode"] == "logprobs",
        max_failure_rate=params["max_failure_rate"],
        generations_path=str(generations),
    )
    client = HttpGenerationClient(params["endpoint"], timeout=params["timeout"])

    task_name = params["task"].strip()
    if task_name.lower() == "mmlu":
        report = run_eval(_load_mcq_tasks(params), client, config)
    else:
        try:
            task = Task(task_name.upper())
        except ValueError:
            raise ValidationError(
                f"unknown task {params['task']!r}: expected 'mmlu' or one of "
                f"{[t.value for t in Task]}"
            ) from None
        examples = [ex for ex in read_examples(params["data"]) if ex.task == task.value]
        if not examples:
            raise ValidationError(f"no {task.value} examples in {params['data']}")
        report = instruction_eval(examples, client, config, task=task)

    artifact = report.canonical_dict()
    artifact["run_config"] = run_config
    dump_json(out, artifact)
    logger.info("report written to %s (%.3fs wall)", out, report.timing["wall_seconds"])
    if report.invalid:
        raise RunFailure(
            f"run invalid: failure rate {report.failures['rate']:.1%} exceeds "
            f"{config.max_failure_rate:.1%} (report written to {out})"
        )
    return 0


def _read_predictions(path: str | Path) -> dict[str, str]:
    from chemtext.harness import GenerationResponse

    predictions: dict[str, str] = {}
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        if "example_id" not in obj:
            raise ValidationError(f"{where}: prediction row needs 'example_id'")
        example_id = str(obj["example_id"])
        if example_id in predictions:
            raise ValidationError(f"{where}: duplicate prediction for example id {example_id!r}")
        if isinstance(obj.get("text"), str):
            predictions[example_id] = obj["text"]
        elif isinstance(obj.get("response"), dict):
            response = GenerationResponse.from_wire(obj["response"])
            if response.text is None:
                raise ValidationError(
                    f"{where}: example id {example_id!r} has no generated text"
                )
            predictions[example_id] = response.text
        else:
            raise ValidationError(f"{where}: prediction row needs 'text' or 'response'")
    return predictions


def _cmd_bench_score(params: dict, run_config: dict) -> int:
    from chemtext.harness import score_instruction_task
    from chemtext.instruct import Task, read_examples

    gold = list(read_examples(params["gold"]))
    if params["task"] is not None:
        try:
            task = Task(str(params["task"]).upper())
        except ValueError:
            raise ValidationError(
                f"unknown task {params['task']!r}: expected one of {[t.value for t in Task]}"
            ) from None
        gold = [ex for ex in gold if ex.task == task.value]
        if not gold:
            raise ValidationError(f"no {task.value} examples in {params['gold']}")
    else:
        names = {ex.task for ex in gold}
        if len(names) != 1:
            raise ValidationError(
                f"gold file holds multiple tasks {sorted(names)}; pass --task to choose one"
            )
        task = Task(names.pop())

    predictions = _read_predictions(params["pred"])
    gold_ids = {ex.example_id for ex in gold}
    for example_id in predictions:
        if example_id not in gold_ids:
            raise ValidationError(f"prediction for unknown example id {example_id!r}")
    for example_id in sorted(gold_ids):
        if example_id not in predictions:
            raise ValidationError(f"missing prediction for example id {example_id!r}")

    metrics = score_instruction_task(gold, predictions)
    schema = params["schema"]
    if schema != "both" and task in (Task.CEE, Task.CER):
        metrics = {key: value for key, value in metrics.items() if key.endswith(f"_{schema}")}
    result = {
        "kind": "score",
        "task": task.value,
        "schema": schema,
        "n_examples": len(gold),
        "metrics": metrics,
        "run_config": run_config,
    }
    if params["output"] is not None:
        dump_json(params["output"], result)
    else:
        print(json.dumps(result, ensure_ascii=False, indent=2, sort_keys=True))
    return 0


def _cmd_bench_report(params: dict, run_config: dict) -> int:
    from chemtext.report import render_report

    subsets = params["subsets"]
    subset_filter = (
        None
        if subsets == "default"
        else [name.strip() for name in subsets.split(",") if name.strip()]
    )
    written = render_report(
        params["runs"],
        params["out_dir"],
        baseline=params["baseline"],
        subset_filter=subset_filter,
    )
    meta_path = Path(params["out_dir"]) / "report.meta.json"
    dump_json(meta_path, {"run_config": run_config})
    for path in written + [meta_path]:
        logger.info("wrote %s", path)
    return 0


# =============================================================================
# Entry point
# =============================================================================


def main(argv: Sequence[str] | None = None) -> int:
    try:
        namespace = build_parser().parse_args(argv)
        params = _effective_params(namespace.command, namespace)
        logging.basicConfig(
            level=getattr(logging, str(params["log_level"]).upper(), logging.INFO),
            stream=sys.stderr,
            format=_LOG_FORMAT,
            force=True,
        )
        run_config = _run_config(namespace.command, params)
        return namespace.func(params, run_config)
    except SystemExit as exc:
        # argparse --help/--version; output has already been printed.
        return 0 if not exc.code else 1
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RunFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected runtime failure
        logger.exception("unexpected failure: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
