"""Command-line entry point.

Every command writes its primary artifact to the given path and prints a
one-line JSON summary on stdout. Exit codes: 1 usage, 2 bad input data,
3 numeric divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from contextlib import nullcontext
from pathlib import Path

from . import evaluation as ev
from .autoencoder import ACTIVATIONS
from .errors import DataError, DivergenceError
from .graph import (HeteroGraph, SentimentNetwork, load_hetero_graph, read_sentiment_triples,
                    split_links, write_sentiment_tsv)
from .model import (AGGREGATIONS, RECON_WEIGHTINGS, SIMILARITIES, TrainConfig, load_model,
                    pair_scores, recommend, save_model, sign_of, train)
from .sentiext import (Lexicon, build_lexicon, emit_signed_edges, label_corpus, read_corpus,
                       read_emoticon_map)
from .synth import SyntheticSpec, generate, write_synthetic

EXIT_USAGE, EXIT_DATA, EXIT_DIVERGENCE = 1, 2, 3

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def inputs_hash(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            continue
        h.update(str(Path(p).name).encode("utf-8") + b"\0")
        with open(p, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return h.hexdigest()


def parse_fractions(text: str) -> list[float]:
    """``0.1,0.5,1`` or ``0.1..1.0`` (step 0.1) or ``0.2..1.0:0.2``."""
    if ".." in text:
        span, _, step = text.partition(":")
        lo, hi = (float(x) for x in span.split(".."))
        step = float(step) if step else 0.1
        if step <= 0 or lo > hi:
            raise UsageError(f"bad fraction range {text!r}")
        n = int(round((hi - lo) / step))
        values = [round(lo + k * step, 10) for k in range(n + 1)]
    else:
        values = [float(x) for x in text.split(",") if x.strip()]
    if not values or any(not 0 < v <= 1 for v in values):
        raise UsageError("fractions must lie in (0, 1]")
    return values


def parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# ----------------------------------------------------------------- config

_CONFIG_FLAGS = {
    "alpha": float, "lambda1": float, "lambda2": float, "lambda3": float, "lambda4": float,
    "learning_rate": float, "batch_size": int, "max_epochs": int, "convergence_tol": float,
    "embedding_dim": int, "init_scale": float,
}


def add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model configuration (flags override --config)")
    g.add_argument("--config", help="JSON file of TrainConfig fields")
    for name, typ in _CONFIG_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    g.add_argument("--hidden-dims", help="comma-separated encoder hidden widths, e.g. 100")
    g.add_argument("--activation", choices=sorted(ACTIVATIONS))
    g.add_argument("--similarity", choices=SIMILARITIES)
    g.add_argument("--aggregation", choices=AGGREGATIONS)
    g.add_argument("--recon-weighting", choices=RECON_WEIGHTINGS)
    g.add_argument("--asymmetric", action="store_true", default=None,
                   help="separate source and target encoders")
    g.add_argument("--no-social", dest="use_social", action="store_false", default=None)
    g.add_argument("--no-profile", dest="use_profile", action="store_false", default=None)


def resolve_config(args) -> TrainConfig:
    base = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    for name in list(_CONFIG_FLAGS) + ["activation", "similarity", "aggregation",
                                       "asymmetric", "use_social", "use_profile"]:
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    if getattr(args, "recon_weighting", None):
        base["recon_weighting"] = args.recon_weighting
    if getattr(args, "hidden_dims", None):
        base["hidden_dims"] = parse_ints(args.hidden_dims)
    if getattr(args, "seed", None) is not None:
        base["seed"] = args.seed
    try:
        return TrainConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def add_graph_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--sentiment", required=required, help="TSV src, dst, sign")
    p.add_argument("--social", help="TSV follower, followee")
    p.add_argument("--profile", help="TSV user, attribute, value")
    p.add_argument("--aggregate-duplicates", action="store_true",
                   help="collapse repeated pairs by majority sign instead of failing")
    p.add_argument("--single-valued", default="",
                   help="comma-separated profile attributes that allow one value per user")


def load_graph(args) -> HeteroGraph:
    single = tuple(a for a in args.single_valued.split(",") if a)
    return load_hetero_graph(args.sentiment, args.social, args.profile,
                             aggregate=args.aggregate_duplicates, single_valued=single)


def graph_inputs(args) -> list:
    return [args.sentiment, args.social, args.profile, getattr(args, "config", None)]


# --------------------------------------------------------------- commands


def cmd_gen_synth(args) -> dict:
    spec = SyntheticSpec(n_nodes=args.n_nodes, n_communities=args.n_communities,
                         intra_positive_prob=args.intra_positive_prob,
                         inter_negative_prob=args.inter_negative_prob,
                         social_homophily=args.social_homophily,
                         social_degree=args.social_degree,
                         profile_informativeness=args.profile_informativeness,
                         noise=args.noise, seed=args.seed)
    paths = write_synthetic(generate(spec), args.out_dir)
    return {"seed": args.seed, "inputs_sha256": None,
            "outputs": {k: str(v) for k, v in paths.items()}}


def cmd_train(args) -> dict:
    config = resolve_config(args)
    g = load_graph(args)
    model = train(g, config)
    save_model(model, args.out)
    loss_path = args.loss_out or f"{args.out}.loss.tsv"
    with open(loss_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch\tloss\n")
        for epoch, loss in enumerate(model.history):
            fh.write(f"{epoch}\t{loss!r}\n")
    return {"seed": config.seed, "inputs_sha256": inputs_hash(graph_inputs(args)),
            "epochs": len(model.history), "final_loss": model.history[-1] if model.history else None,
            "outputs": {"model": args.out, "loss": loss_path}}


def _model_index(model):
    return {ext: i for i, ext in enumerate(model.node_ids)}


def _lookup(index, ext, where):
    try:
        return index[ext]
    except KeyError:
        raise DataError(f"{where}: node {ext!r} is not in the model's node table") from None


def cmd_predict(args) -> dict:
    model = load_model(args.model)
    index = _model_index(model)
    pairs, names = [], []
    with open(args.pairs, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise DataError(f"{args.pairs}:{lineno}: expected 'i<TAB>j'")
            where = f"{args.pairs}:{lineno}"
            pairs.append((_lookup(index, parts[0], where), _lookup(index, parts[1], where)))
            names.append((parts[0], parts[1]))
    scores = pair_scores(model, pairs)
    signs = sign_of(scores)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for (a, b), s, sg in zip(names, scores, signs):
            fh.write(f"{a}\t{b}\t{float(s)!r}\t{'+1' if sg > 0 else '-1'}\n")
    return {"seed": model.config.seed, "inputs_sha256": inputs_hash([args.model, args.pairs]),
            "n_pairs": len(pairs), "outputs": {"predictions": args.out}}


def _observed_graph(model, path) -> HeteroGraph:
    index = _model_index(model)
    src, dst, sign = [], [], []
    seen = set()
    for a, b, v, lineno in read_sentiment_triples(path):
        i, j = _lookup(index, a, f"{path}:{lineno}"), _lookup(index, b, f"{path}:{lineno}")
        if (i, j) not in seen:
            seen.add((i, j))
            src.append(i)
            dst.append(j)
            sign.append(v)
    n = len(model.node_ids)
    return HeteroGraph(tuple(model.node_ids), SentimentNetwork(n, src, dst, sign))


def cmd_recommend(args) -> dict:
    model = load_model(args.model)
    index = _model_index(model)
    users = list(args.user)
    if args.users_file:
        with open(args.users_file, encoding="utf-8") as fh:
            users += [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not users:
        raise UsageError("give --user or --users-file")
    exclude = not args.no_exclude
    if exclude and not args.sentiment:
        raise UsageError("--sentiment (training links) is needed to exclude observed targets; "
                         "or pass --no-exclude")
    observed = _observed_graph(model, args.sentiment) if exclude else None
    short = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("user\trank\tnode\tscore\n")
        for ext in users:
            rec = recommend(model, None, _lookup(index, ext, "--user"), args.k, args.polarity,
                            exclude_observed=exclude, observed=observed)
            short += rec.short
            for rank, (node, score) in enumerate(zip(rec.nodes, rec.scores), 1):
                fh.write(f"{ext}\t{rank}\t{model.node_ids[node]}\t{score!r}\n")
    return {"seed": model.config.seed,
            "inputs_sha256": inputs_hash([args.model, args.sentiment]),
            "n_users": len(users), "short_lists": short, "outputs": {"recommendations": args.out}}


def cmd_evaluate(args) -> dict:
    config = resolve_config(args)
    g = load_graph(args)
    seed = config.seed
    if args.scores:
        if args.task != "link-prediction" or args.split != "standard":
            raise UsageError("--scores supports the standard link-prediction split only")
        _, test = split_links(g, args.test_fraction, balanced=True, seed=seed)
        metrics = ev.external_link_metrics(test, ev.read_score_file(args.scores, g))
        reports = [ev.EvalReport("link_prediction", "standard", {"source": "external"},
                                 metrics, seed, ev.config_fingerprint(config),
                                 {"n_test_links": int(len(test))})]
    elif args.task == "link-prediction":
        reports = ev.run_link_prediction(g, config, args.split.replace("-", "_"),
                                         parse_fractions(args.fractions),
                                         args.test_fraction, seed)
    else:
        if args.split != "standard":
            raise UsageError("node recommendation uses the standard split")
        reports = ev.run_node_recommendation(g, config, parse_ints(args.k_values),
                                             args.test_fraction, seed)
    if args.export_test:
        _, test = split_links(g, args.test_fraction, balanced=True, seed=seed)
        write_sentiment_tsv(test, args.export_test, g.nodes)
    tsv = args.tsv or str(Path(args.out).with_suffix(".tsv"))
    ev.save_reports(reports, args.out, tsv)
    return {"seed": seed, "inputs_sha256": inputs_hash(graph_inputs(args) + [args.scores]),
            "n_reports": len(reports), "outputs": {"report": args.out, "table": tsv}}


def cmd_build_lexicon(args) -> dict:
    emoticons = read_emoticon_map(args.emoticons)
    tweets = label_corpus(read_corpus(args.corpus), emoticons)
    lex = build_lexicon(tweets, min_freq=args.min_freq, max_freq=args.max_freq,
                        smoothing=args.smoothing, exclude=emoticons)
    lex.save(args.out)
    return {"seed": None, "inputs_sha256": inputs_hash([args.corpus, args.emoticons]),
            "n_words": len(lex), "outputs": {"lexicon": args.out}}


def cmd_extract_sentiment(args) -> dict:
    lex = Lexicon.load(args.lexicon)
    tweets = read_corpus(args.corpus)
    edges = emit_signed_edges(tweets, lex, args.threshold)
    write_sentiment_tsv(edges, args.out)
    return {"seed": None, "inputs_sha256": inputs_hash([args.corpus, args.lexicon]),
            "n_edges": len(edges), "outputs": {"sentiment": args.out}}


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sentilink", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="cap BLAS/OpenMP threads (default: library choice)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-synth", help="write a planted-community synthetic dataset")
    p.add_argument("--out-dir", required=True)
    d = SyntheticSpec()
    p.add_argument("--n-nodes", type=int, default=d.n_nodes)
    p.add_argument("--n-communities", type=int, default=d.n_communities)
    p.add_argument("--intra-positive-prob", type=float, default=d.intra_positive_prob)
    p.add_argument("--inter-negative-prob", type=float, default=d.inter_negative_prob)
    p.add_argument("--social-homophily", type=float, default=d.social_homophily)
    p.add_argument("--social-degree", type=int, default=d.social_degree)
    p.add_argument("--profile-informativeness", type=float, default=d.profile_informativeness)
    p.add_argument("--noise", type=float, default=d.noise)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train a model and write it with its loss curve")
    add_graph_flags(p)
    add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--loss-out", help="loss TSV (default: <out>.loss.tsv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score user pairs with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True, help="TSV i, j (external ids)")
    p.add_argument("--out", required=True, help="TSV i, j, score, sign")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("recommend", help="top-K liked or disliked nodes per user")
    p.add_argument("--model", required=True)
    p.add_argument("--user", action="append", default=[], help="external id (repeatable)")
    p.add_argument("--users-file", help="one external id per line")
    p.add_argument("-k", "--k", type=int, default=10)
    p.add_argument("--polarity", choices=("positive", "negative"), default="positive")
    p.add_argument("--sentiment", help="training links whose targets are excluded")
    p.add_argument("--no-exclude", action="store_true", help="keep already-rated targets")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="run a link-prediction or recommendation experiment")
    add_graph_flags(p)
    add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--task", choices=("link-prediction", "node-recommendation"),
                   default="link-prediction")
    p.add_argument("--split", choices=("standard", "cold-start"), default="standard")
    p.add_argument("--fractions", default="1.0", help="e.g. 0.1..1.0 or 0.5,1.0")
    p.add_argument("--k-values", default="10", help="comma-separated K values")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--scores", help="external TSV i, j, score to evaluate instead of training")
    p.add_argument("--export-test", help="write the balanced test links used by --scores")
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--tsv", help="companion table (default: <out>.tsv)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("build-lexicon", help="PMI lexicon from emoticon-labelled tweets")
    p.add_argument("--corpus", required=True, help="JSON lines of pre-processed tweets")
    p.add_argument("--emoticons", required=True, help="TSV emoticon, pos|neg")
    p.add_argument("--min-freq", type=int, default=1)
    p.add_argument("--max-freq", type=int, default=None)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_lexicon)

    p = sub.add_parser("extract-sentiment", help="signed user->entity edges from tweets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--threshold", type=float, required=True,
                   help="minimum |score| for an edge (no default)")
    p.add_argument("--out", required=True, help="sentiment TSV")
    p.set_defaults(func=cmd_extract_sentiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        print("sentilink: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None:
        from threadpoolctl import threadpool_limits
        limit = threadpool_limits(limits=args.threads)
    else:
        limit = nullcontext()
    start = time.perf_counter()
    try:
        with limit:
            summary = args.func(args)
    except UsageError as exc:
        print(f"sentilink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"sentilink: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DataError, OSError, KeyError, IndexError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"sentilink: data error: {msg}", file=sys.stderr)
        return EXIT_DATA
    summary = {"command": args.command, **summary,
               "elapsed_s": round(time.perf_counter() - start, 3)}
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
