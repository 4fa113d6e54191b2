"""Command-line front door: `morphcheck run|count|graph|probe`.

Run configurations are JSON. Property expressions use a nested tree:

    {"op": "ord", "view": {"name": "s_pos", "extraction": "softmax_component",
                           "index": 1}, "i": 0, "j": 1}
    {"op": "eq", "i": 0, "j": 1}
    {"op": "sim", "i": 0, "j": 1, "theta": 0.9}
    {"op": "pred", "predicate": {"name": "v_syn", "class_index": 1}, "i": 0}
    {"op": "not"|"and"|"or"|"implies"|"iff", ...}   (inner / left+right)
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import engine, fixtures, probe as probe_mod, relations, transforms
from .adapters import (
    HashEmbedding,
    HttpPort,
    LexiconSentiment,
    ModelPort,
    TaxonomyLexical,
)
from .core import Dataset, ScoreVector, TextInput, ViewRequest
from .errors import ConfigError, MorphcheckError
from .properties import (
    And,
    BooleanPredicate,
    Eq,
    Iff,
    Implies,
    Not,
    Or,
    Ord,
    Pred,
    PropertyExpr,
    ScoreView,
    Sim,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2


def _require(obj: dict, key: str, pointer: str):
    if key not in obj:
        raise ConfigError(f"{pointer}/{key}: missing required field")
    return obj[key]


def _score_view_from_json(obj: dict, pointer: str) -> ScoreView:
    extraction = _require(obj, "extraction", pointer)
    if extraction == "probe":
        probe_path = _require(obj, "probe_path", pointer)
        return ScoreView(
            name=obj.get("name", "probe"),
            extraction="probe",
            probe=probe_mod.LinearProbe.load(probe_path),
        )
    return ScoreView(
        name=obj.get("name", extraction),
        extraction=extraction,
        index=obj.get("index"),
    )


def expr_from_json(obj: dict, pointer: str = "/expr") -> PropertyExpr:
    op = _require(obj, "op", pointer)
    if op == "eq":
        return Eq(_require(obj, "i", pointer), _require(obj, "j", pointer))
    if op == "sim":
        return Sim(_require(obj, "i", pointer), _require(obj, "j", pointer), obj.get("theta", 0.9))
    if op == "ord":
        view = _score_view_from_json(_require(obj, "view", pointer), pointer + "/view")
        return Ord(view, _require(obj, "i", pointer), _require(obj, "j", pointer))
    if op == "pred":
        p = _require(obj, "predicate", pointer)
        return Pred(
            BooleanPredicate(
                name=_require(p, "name", pointer + "/predicate"),
                class_index=_require(p, "class_index", pointer + "/predicate"),
            ),
            _require(obj, "i", pointer),
        )
    if op == "not":
        return Not(expr_from_json(_require(obj, "inner", pointer), pointer + "/inner"))
    binary = {"and": And, "or": Or, "implies": Implies, "iff": Iff}
    if op in binary:
        return binary[op](
            expr_from_json(_require(obj, "left", pointer), pointer + "/left"),
            expr_from_json(_require(obj, "right", pointer), pointer + "/right"),
        )
    raise ConfigError(f"{pointer}/op: unknown operator {op!r}")


def transform_from_json(obj: dict, pointer: str) -> transforms.TransformSpec:
    kind = _require(obj, "kind", pointer)
    if kind == "concat_sentence":
        return transforms.ConcatSentence(
            text=_require(obj, "text", pointer), position=obj.get("position", "end")
        )
    if kind in ("synonym_replace", "antonym_replace"):
        if "lexicon_path" in obj:
            lexicon = transforms.Lexicon.from_tsv(obj["lexicon_path"])
        else:
            lexicon = transforms.Lexicon(entries=_require(obj, "lexicon", pointer))
        cls = transforms.SynonymReplace if kind == "synonym_replace" else transforms.AntonymReplace
        return cls(lexicon=lexicon, rate=obj.get("rate", 1.0), seed=obj.get("seed", 0))
    if kind == "keyword_swap":
        return transforms.KeywordSwap(mapping=_require(obj, "mapping", pointer))
    if kind == "char_keyboard_typo":
        layout = (
            transforms.KeyboardLayout.from_tsv(obj["layout_path"])
            if "layout_path" in obj
            else transforms.KeyboardLayout()
        )
        return transforms.CharKeyboardTypo(
            layout=layout, rate=obj.get("rate", 0.1), seed=obj.get("seed", 0)
        )
    if kind == "char_random_replace":
        return transforms.CharRandomReplace(rate=obj.get("rate", 0.1), seed=obj.get("seed", 0))
    if kind == "char_swap_neighbors":
        return transforms.CharSwapNeighbors(rate=obj.get("rate", 0.1), seed=obj.get("seed", 0))
    if kind == "char_shuffle_word":
        return transforms.CharShuffleWord(rate=obj.get("rate", 0.1), seed=obj.get("seed", 0))
    if kind == "sentence_shuffle":
        return transforms.SentenceShuffle(seed=obj.get("seed", 0))
    if kind == "template_instantiate":
        return transforms.TemplateInstantiate(
            context=_require(obj, "context", pointer),
            insertion=_require(obj, "insertion", pointer),
        )
    raise ConfigError(f"{pointer}/kind: unknown transform {kind!r}")


def model_from_config(obj, pointer: str = "/model") -> ModelPort:
    if isinstance(obj, str):
        if obj.startswith("stub:"):
            return _stub_by_name(obj[len("stub:"):], {}, pointer)
        return HttpPort(obj)
    if "url" in obj:
        return HttpPort(obj["url"])
    if "stub" in obj:
        return _stub_by_name(obj["stub"], obj, pointer)
    raise ConfigError(f"{pointer}: need a 'url' or 'stub' entry")


def _stub_by_name(name: str, obj: dict, pointer: str) -> ModelPort:
    if name in ("lexicon_sentiment", "sentiment"):
        valence = obj.get("valence") or fixtures.fixture_valence()
        return LexiconSentiment(valence=valence)
    if name in ("hash_embedding", "embedding"):
        return HashEmbedding(dim=obj.get("dim", 16), seed=obj.get("seed", 0))
    if name in ("taxonomy", "taxonomy_lexical"):
        kwargs = {
            "separator": obj.get("separator", " "),
            "transitive_closure": obj.get("transitive_closure", False),
        }
        if "path" in obj:
            return TaxonomyLexical.from_tsv(obj["path"], **kwargs)
        syn, hyper, _ = fixtures.small_taxonomy()
        return TaxonomyLexical(syn_edges=syn, hyper_edges=hyper, **kwargs)
    raise ConfigError(f"{pointer}/stub: unknown stub {name!r}")


def mode_from_json(obj: dict, pointer: str = "/enumeration") -> engine.EnumerationMode:
    shape = _require(obj, "shape", pointer)
    selection = obj.get("selection", "exhaustive")
    if isinstance(selection, dict):
        sample = _require(selection, "sample", pointer + "/selection")
        return engine.EnumerationMode(
            shape=shape,
            selection="sample",
            sample_size=_require(sample, "n", pointer + "/selection/sample"),
            sample_seed=sample.get("seed", 0),
            allow_self=obj.get("allow_self", False),
        )
    return engine.EnumerationMode(
        shape=shape, selection=selection, allow_self=obj.get("allow_self", False)
    )


def load_dataset(obj: dict, pointer: str = "/dataset") -> Dataset:
    path = Path(_require(obj, "path", pointer))
    if not path.exists():
        raise ConfigError(f"{pointer}/path: file not found: {path}")
    fmt = obj.get("format", "jsonl")
    if fmt == "jsonl":
        return Dataset.from_jsonl(path)
    if fmt == "text":
        return Dataset.from_text_lines(path)
    raise ConfigError(f"{pointer}/format: unknown format {fmt!r}")


@dataclass
class RunSpec:
    """Fully resolved run: (plan, dataset) jobs sharing one score cache."""

    jobs: List[Tuple[object, Dataset]]
    mode: engine.EnumerationMode
    port: ModelPort
    groupings: List[str]
    budget: float = 1.0
    workers: int = 1
    formats: List[str] = field(default_factory=lambda: ["json"])
    out: Optional[str] = None
    emit_cases: Optional[str] = None


def _pos_score_view() -> ScoreView:
    return ScoreView(name="s_pos", extraction="softmax_component", index=1)


def _build_systematicity_preset(config: dict) -> RunSpec:
    dataset = (
        load_dataset(config["dataset"]) if "dataset" in config else fixtures.synthetic_reviews()
    )
    s_pos = _pos_score_view()
    plans = [
        relations.PairwiseSystematicity(
            transform=t,
            premise=Ord(s_pos, 0, 1),
            hypothesis=Ord(s_pos, 2, 3),
        )
        for t in fixtures.sentiment_transforms()
    ]
    port = model_from_config(config.get("model", "stub:lexicon_sentiment"))
    mode = (
        mode_from_json(config["enumeration"])
        if "enumeration" in config
        else engine.EnumerationMode(shape="ordered_pairs")
    )
    return RunSpec(
        jobs=[(plan, dataset) for plan in plans],
        mode=mode,
        port=port,
        groupings=config.get("grouping", ["by_transformation", "by_source_input"]),
    )


def _build_transitivity_preset(config: dict) -> RunSpec:
    seed = config.get("seed", 0)
    if "model" in config:
        port = model_from_config(config["model"])
        dataset = load_dataset(config["dataset"])
    else:
        syn, hyper, dataset = fixtures.small_taxonomy()
        port = TaxonomyLexical(
            syn_edges=syn,
            hyper_edges=hyper,
            transitive_closure=config.get("transitive_closure", False),
        )
    plans = [
        relations.ThreeWayTransitivity(
            predicate=BooleanPredicate(name="v_syn", class_index=1)
        ),
        relations.ThreeWayTransitivity(
            predicate=BooleanPredicate(name="v_hyp", class_index=2)
        ),
    ]
    mode = (
        mode_from_json(config["enumeration"])
        if "enumeration" in config
        else engine.EnumerationMode(
            shape="ordered_triplets", selection="sample", sample_size=1000, sample_seed=seed
        )
    )
    return RunSpec(
        jobs=[(plan, dataset) for plan in plans],
        mode=mode,
        port=port,
        groupings=config.get("grouping", ["by_transformation"]),
    )


TRAINING_CONTEXT = "I noticed the ⟨x⟩ there."


def build_compositionality_jobs(
    contexts: Sequence[Tuple[str, str]],
    pairs: Sequence[Tuple[str, str, str]],
    port: ModelPort,
    layer: int = -2,
    epochs: int = 1000,
    separator: str = " ",
):
    """Train the hypernymy probe on a disjoint split of the insertion pairs,
    then produce one (plan, dataset) job per context over the held-out half.
    """
    train_pairs = [p for i, p in enumerate(pairs) if i % 2 == 0]
    eval_pairs = [p for i, p in enumerate(pairs) if i % 2 == 1]
    overlap = {(a, b) for a, b, _ in train_pairs} & {(a, b) for a, b, _ in eval_pairs}
    if overlap:
        print(f"warning: probe training overlaps evaluation on {sorted(overlap)}", file=sys.stderr)

    hidden_dim = port.capabilities().hidden_dim
    examples = []
    for a, b, rel in train_pairs:
        text = transforms.instantiate_pair(TRAINING_CONTEXT, a, b, separator)
        view = ViewRequest(kind="hidden", layer=layer, spans=text.spans)
        (row,) = port.score_batch([text], [view])
        examples.append(probe_mod.ProbeExample(z=row[0], label=1 if rel == "hyper" else 0))
    trained = probe_mod.train(examples, epochs=epochs)

    hidden_score = ScoreView(name="s_hyp", extraction="probe", probe=trained)
    output_score = ScoreView(name="s_ent", extraction="softmax_component", index=1)
    jobs = []
    for context, monotonicity in contexts:
        entries = tuple(
            transforms.instantiate_pair(context, a, b, separator, id=f"({a},{b})")
            for a, b, _ in eval_pairs
        )
        dataset = Dataset(entries=entries, name=f"ctx:{context}")
        plan = relations.PairwiseCompositionality(
            hidden_view=ViewRequest(kind="hidden", layer=layer),
            hidden_score=hidden_score,
            output_score=output_score,
            monotonicity=monotonicity,
            group=context,
        )
        jobs.append((plan, dataset))
    return jobs, trained


def _build_compositionality_preset(config: dict) -> RunSpec:
    contexts = (
        transforms.load_contexts(config["contexts_path"])
        if "contexts_path" in config
        else fixtures.monotone_contexts()
    )
    pairs = (
        transforms.load_insertion_pairs(config["insertions_path"])
        if "insertions_path" in config
        else fixtures.insertion_pairs()
    )
    port = model_from_config(config.get("model", "stub:hash_embedding"))
    jobs, _ = build_compositionality_jobs(
        contexts, pairs, port, layer=config.get("layer", -2), epochs=config.get("epochs", 200)
    )
    mode = (
        mode_from_json(config["enumeration"])
        if "enumeration" in config
        else engine.EnumerationMode(shape="unordered_pairs")
    )
    return RunSpec(
        jobs=jobs,
        mode=mode,
        port=port,
        groupings=config.get("grouping", ["by_context", "by_insertion_pair"]),
    )


_PRESETS = {
    "systematicity-sentiment": _build_systematicity_preset,
    "compositionality-nli": _build_compositionality_preset,
    "transitivity-lexical": _build_transitivity_preset,
}


def _build_explicit(config: dict) -> RunSpec:
    plan_cfg = _require(config, "plan", "")
    cls = _require(plan_cfg, "class", "/plan")
    dataset = load_dataset(_require(config, "dataset", ""))
    port = model_from_config(_require(config, "model", ""))
    mode = mode_from_json(_require(config, "enumeration", ""))
    jobs: List[Tuple[object, Dataset]] = []
    if cls == "single_input":
        plan = relations.SingleInput(
            transform=transform_from_json(_require(plan_cfg, "transform", "/plan"), "/plan/transform"),
            prop=expr_from_json(_require(plan_cfg, "property", "/plan"), "/plan/property"),
        )
        jobs.append((plan, dataset))
    elif cls == "pairwise_systematicity":
        premise = expr_from_json(_require(plan_cfg, "premise", "/plan"), "/plan/premise")
        hypothesis = expr_from_json(_require(plan_cfg, "hypothesis", "/plan"), "/plan/hypothesis")
        connective = plan_cfg.get("connective", "implies")
        transform_cfgs = plan_cfg.get("transforms")
        if transform_cfgs is None:
            transform_cfgs = [_require(plan_cfg, "transform", "/plan")]
        for t_idx, t_cfg in enumerate(transform_cfgs):
            plan = relations.PairwiseSystematicity(
                transform=transform_from_json(t_cfg, f"/plan/transforms/{t_idx}"),
                premise=premise,
                hypothesis=hypothesis,
                connective=connective,
            )
            jobs.append((plan, dataset))
    elif cls == "three_way_transitivity":
        p = _require(plan_cfg, "predicate", "/plan")
        plan = relations.ThreeWayTransitivity(
            predicate=BooleanPredicate(
                name=_require(p, "name", "/plan/predicate"),
                class_index=_require(p, "class_index", "/plan/predicate"),
            ),
            separator=plan_cfg.get("separator", " "),
        )
        jobs.append((plan, dataset))
    elif cls == "pairwise_compositionality":
        raise ConfigError(
            "/plan/class: pairwise_compositionality runs via the "
            "'compositionality-nli' preset (it needs probe training)"
        )
    else:
        raise ConfigError(f"/plan/class: unknown relation class {cls!r}")
    groupings = config.get("grouping", ["by_transformation"])
    return RunSpec(jobs=jobs, mode=mode, port=port, groupings=groupings)


def build_run_spec(config: dict) -> RunSpec:
    if "preset" in config:
        name = config["preset"]
        if name not in _PRESETS:
            raise ConfigError(f"/preset: unknown preset {name!r} (have {sorted(_PRESETS)})")
        spec = _PRESETS[name](config)
    else:
        spec = _build_explicit(config)
    spec.budget = config.get("budget", spec.budget)
    spec.workers = config.get("workers", spec.workers)
    if "format" in config:
        fmt = config["format"]
        spec.formats = fmt if isinstance(fmt, list) else [fmt]
    spec.out = config.get("out", spec.out)
    spec.emit_cases = config.get("emit_cases", spec.emit_cases)
    return spec


_RENDERERS = {
    "json": engine.render_json,
    "csv": engine.render_csv,
    "md": engine.render_markdown,
}


def execute(spec: RunSpec, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    cache = engine.ScoreCache()
    merged = engine.VerdictSet()
    sink = open(spec.emit_cases, "w", encoding="utf-8") if spec.emit_cases else None
    try:
        for plan, dataset in spec.jobs:
            vs = engine.run(
                plan,
                dataset,
                spec.mode,
                spec.port,
                cache=cache,
                workers=spec.workers,
                case_sink=sink,
            )
            merged.merge(vs)
    finally:
        if sink:
            sink.close()

    outputs = []
    for grouping in spec.groupings:
        report = engine.aggregate(merged, grouping)
        for fmt in spec.formats:
            outputs.append(_RENDERERS[fmt](report))
    rendered = "\n".join(outputs)
    if spec.out:
        Path(spec.out).write_text(rendered, encoding="utf-8")
    else:
        stdout.write(rendered)

    proportion = merged.violation_proportion()
    summary = (
        f"cases={merged.total} satisfied={merged.satisfied} violated={merged.violated} "
        f"vacuous={merged.vacuous} errors={merged.errors} proportion={proportion:.6f}\n"
    )
    stdout.write(summary)
    if proportion > spec.budget:
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_run(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.model:
        config["model"] = args.model
    elif "model" not in config and os.environ.get("MORPHCHECK_MODEL_URL"):
        config["model"] = os.environ["MORPHCHECK_MODEL_URL"]
    if args.seed is not None:
        config["seed"] = args.seed
    if args.budget is not None:
        config["budget"] = args.budget
    if args.workers is not None:
        config["workers"] = args.workers
    if args.format:
        config["format"] = args.format
    if args.out:
        config["out"] = args.out
    if args.emit_cases:
        config["emit_cases"] = args.emit_cases
    spec = build_run_spec(config)
    return execute(spec)


def _cmd_count(args) -> int:
    mode = engine.EnumerationMode(shape=args.shape, allow_self=args.allow_self)
    print(engine.count(mode, args.k))
    return EXIT_OK


def _representative_plan(name: str):
    s_pos = _pos_score_view()
    if name == "single_input":
        return relations.SingleInput(
            transform=transforms.ConcatSentence("Thank you.", "start"),
            prop=Eq(0, 1),
        )
    if name == "pairwise_systematicity":
        return relations.PairwiseSystematicity(
            transform=transforms.ConcatSentence("Thank you.", "start"),
            premise=Ord(s_pos, 0, 1),
            hypothesis=Ord(s_pos, 2, 3),
        )
    if name == "pairwise_compositionality":
        return relations.PairwiseCompositionality(
            hidden_view=ViewRequest(kind="hidden", layer=-2),
            hidden_score=ScoreView(name="s_hyp", extraction="scalar_passthrough"),
            output_score=s_pos,
        )
    if name == "three_way_transitivity":
        return relations.ThreeWayTransitivity(
            predicate=BooleanPredicate(name="v_syn", class_index=1)
        )
    raise ConfigError(f"unknown relation class {name!r}")


def _cmd_graph(args) -> int:
    plan = _representative_plan(args.relation)
    dot = relations.emit_dot(relations.compile_plan(plan), name=args.relation)
    if args.out:
        Path(args.out).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def _cmd_probe_train(args) -> int:
    examples = []
    for line in Path(args.examples).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        examples.append(
            probe_mod.ProbeExample(
                z=ScoreVector(values=tuple(obj["z"]), kind="embedding"),
                label=int(obj["label"]),
            )
        )
    trained = probe_mod.train(
        examples, epochs=args.epochs, learning_rate=args.lr, seed=args.seed
    )
    if args.out:
        trained.save(args.out)
    else:
        print(trained.to_json())
    meta = trained.trained_on
    print(
        f"trained on {int(meta['examples'])} examples, final loss {meta['final_loss']:.6f}, "
        f"train accuracy {meta['train_accuracy']:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphcheck")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a relation test run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--model", help="service URL or stub:NAME")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--format", choices=["json", "csv", "md"])
    p_run.add_argument("--out")
    p_run.add_argument("--budget", type=float)
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--emit-cases", dest="emit_cases")
    p_run.set_defaults(func=_cmd_run)

    p_count = sub.add_parser("count", help="closed-form case count")
    p_count.add_argument("shape", choices=["singles", "ordered_pairs", "unordered_pairs", "ordered_triplets"])
    p_count.add_argument("k", type=int)
    p_count.add_argument("--allow-self", action="store_true")
    p_count.set_defaults(func=_cmd_count)

    p_graph = sub.add_parser("graph", help="emit the relation structure as DOT")
    p_graph.add_argument(
        "relation",
        choices=[
            "single_input",
            "pairwise_systematicity",
            "pairwise_compositionality",
            "three_way_transitivity",
        ],
    )
    p_graph.add_argument("--out")
    p_graph.set_defaults(func=_cmd_graph)

    p_probe = sub.add_parser("probe", help="probe utilities")
    probe_sub = p_probe.add_subparsers(dest="probe_command", required=True)
    p_train = probe_sub.add_parser("train", help="train a linear probe from a JSONL example file")
    p_train.add_argument("--examples", required=True)
    p_train.add_argument("--epochs", type=int, default=1000)
    p_train.add_argument("--lr", type=float, default=0.1)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out")
    p_train.set_defaults(func=_cmd_probe_train)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except MorphcheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
