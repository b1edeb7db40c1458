"""Command-line entry points.

Batch subcommands (synth, stats, mine, parse, eval, compare, qa simulate) call
the library directly; `qa serve` starts the HTTP session service and `qa next`
/ `qa answer` are thin clients for it.

Every subcommand accepts --config FILE, a key=value text file (one pair per
line, # comments) whose keys are the long flag names; explicit flags win over
config values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .annotations import read_annotations, read_ground_truth
from .aog.config import MiningConfig
from .aog.model import AndOrGraph, load_graph, save_graph
from .aog.parsing import parse_many
from .comparison import compare_policies, standard_benchmark, write_curves_csv
from .errors import ConfigError, PartAogError
from .evaluation import evaluate, write_report_csv, write_report_json
from .features.io import VolumeStore, load_manifest
from .features.stats import channel_stats, stats_to_dict
from .features.synth import BumpSpec, SynthConfig, TemplateLayout, synth_generate
from .qa.loop import active_selector, random_selector, run_loop, write_trace
from .qa.oracle import SimulatedOracle
from .qa.persistence import save_session
from .qa.state import QaConfig, QaSession

DEFAULT_HOST = os.environ.get("PARTAOG_HOST", "127.0.0.1")
DEFAULT_PORT = int(os.environ.get("PARTAOG_PORT", "8700"))
DEFAULT_URL = os.environ.get("PARTAOG_URL", "http://%s:%d" % (DEFAULT_HOST, DEFAULT_PORT))


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("%s line %d: expected key = value" % (path, lineno))
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Args:
    """add_argument wrapper that lets a config file supply defaults."""

    def __init__(self, sp: argparse.ArgumentParser, defaults: dict[str, str]):
        self.sp = sp
        self.defaults = defaults

    def add(self, *names, **kw):
        dest = kw.get("dest") or names[-1].lstrip("-").replace("-", "_")
        if dest in self.defaults:
            raw = self.defaults[dest]
            if kw.get("action") == "store_true":
                kw["default"] = raw.lower() in ("1", "true", "yes", "on")
            elif kw.get("nargs") in ("+", "*"):
                typ = kw.get("type", str)
                kw["default"] = [typ(part) for part in raw.split()]
            elif kw.get("type") is not None:
                kw["default"] = kw["type"](raw)
            else:
                kw["default"] = raw
            kw.pop("required", None)
        self.sp.add_argument(*names, **kw)


def _add_mining_flags(h: _Args) -> None:
    h.add("--patterns-per-template", type=int, default=32, help="patterns mined per template")
    h.add("--window-radius", type=float, default=5.0, help="deformation window half-side, cells")
    h.add("--sigma-factor", type=float, default=0.15, help="sigma_s as a fraction of the image diagonal")
    h.add("--sigma-override", type=float, default=None, help="fixed sigma_s in px (overrides --sigma-factor)")
    h.add("--deformation-weight", type=float, default=0.5)
    h.add("--candidate-stride", type=int, default=1, help="grid stride for candidate pattern centers")
    h.add("--refine-iterations", type=int, default=1)
    h.add("--local-term-weight", type=float, default=1.0)


def _mining_from_args(args) -> MiningConfig:
    return MiningConfig(
        patterns_per_template=args.patterns_per_template,
        window_radius=args.window_radius,
        sigma_factor=args.sigma_factor,
        sigma_override=args.sigma_override,
        deformation_weight=args.deformation_weight,
        candidate_stride=args.candidate_stride,
        refine_iterations=args.refine_iterations,
        local_term_weight=args.local_term_weight,
    )


def _add_qa_flags(h: _Args) -> None:
    h.add("--part-name", default="part")
    h.add("--alpha", type=float, default=4.0, help="similarity decay in the gain prediction")
    h.add("--beta", type=float, default=1.0)
    h.add("--epsilon", type=float, default=1e-6)
    h.add("--mode", choices=("simplified", "full_kl"), default="simplified")
    h.add("--first-question", choices=("lowest", "random"), default="lowest")
    h.add("--seed", type=int, default=0)
    h.add("--iou-threshold", type=float, default=0.5)
    _add_mining_flags(h)


def _qa_config_from_args(args) -> QaConfig:
    return QaConfig(
        part_name=args.part_name,
        alpha=args.alpha,
        beta=args.beta,
        epsilon=args.epsilon,
        mode=args.mode,
        first_question=args.first_question,
        seed=args.seed,
        iou_threshold=args.iou_threshold,
        mining=_mining_from_args(args),
    )


def _load_store(manifest_path) -> VolumeStore:
    return VolumeStore(load_manifest(Path(manifest_path)))


def _layouts_from_file(path) -> tuple[TemplateLayout, ...]:
    doc = json.loads(Path(path).read_text())
    layouts = []
    for t in doc:
        layouts.append(
            TemplateLayout(
                label=t["label"],
                bumps=tuple(
                    BumpSpec(b["channel"], b["d_row"], b["d_col"], b["amplitude"])
                    for b in t["bumps"]
                ),
                box_w=t["box_w"],
                box_h=t["box_h"],
                frequency=t.get("frequency", 1.0),
                placement_jitter=t.get("placement_jitter", 0.0),
            )
        )
    return tuple(layouts)


# --- subcommands -------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.layout is not None:
        templates = _layouts_from_file(args.layout)
    else:
        templates = standard_benchmark().synth.templates
    cfg = SynthConfig(
        templates=templates,
        num_images=args.images,
        grid_h=args.grid_h,
        grid_w=args.grid_w,
        num_channels=args.channels,
        stride_px=args.stride,
        noise=args.noise,
        bump_sigma=args.bump_sigma,
        center_jitter=args.center_jitter,
        flip_fraction=args.flip_fraction,
        absent_fraction=args.absent_fraction,
    )
    manifest, gt = synth_generate(cfg, args.seed, args.out)
    absent = sum(1 for a in gt.values() if a is None)
    print(
        "wrote %d volumes to %s (%d part-free), manifest + ground truth alongside"
        % (len(manifest), args.out, absent)
    )
    return 0


def cmd_stats(args) -> int:
    stats = channel_stats(_load_store(args.manifest))
    Path(args.out).write_text(json.dumps(stats_to_dict(stats), sort_keys=True, indent=1) + "\n")
    print("wrote statistics for %d channels to %s" % (len(stats.entries), args.out))
    return 0


def cmd_mine(args) -> int:
    from .aog.mining import mine_template

    store = _load_store(args.manifest)
    stats = channel_stats(store)
    annots = read_annotations(args.annotations)
    if not annots:
        raise ConfigError("annotation file %s is empty" % args.annotations)
    cfg = _mining_from_args(args)
    by_label: dict[str, list] = {}
    for a in annots:
        by_label.setdefault(a.template_label, []).append(a)
    templates = tuple(
        mine_template(label, by_label[label], store, stats, cfg, template_id=i)
        for i, label in enumerate(sorted(by_label))
    )
    aog = AndOrGraph(
        part_name=args.part_name, templates=templates, normalization=stats, mining_config=cfg
    )
    save_graph(aog, args.out)
    print(
        "mined %d templates (%d annotations) into %s"
        % (len(templates), len(annots), args.out)
    )
    return 0


def _stats_for_graph(aog: AndOrGraph, store: VolumeStore):
    if aog.normalization is not None:
        return aog.normalization
    return channel_stats(store)


def cmd_parse(args) -> int:
    store = _load_store(args.manifest)
    aog = load_graph(args.aog)
    stats = _stats_for_graph(aog, store)
    parses = parse_many(store, aog, stats)
    doc = {
        "parses": {
            image_id: {
                "template_id": pg.template_id,
                "template_label": aog.template_by_id(pg.template_id).label,
                "part_box": pg.part_box.to_list(),
                "part_center": list(pg.part_center),
                "part_score": pg.part_score,
            }
            for image_id, pg in sorted(parses.items())
        },
        "metrics": None,
    }
    if args.ground_truth is not None:
        gt = read_ground_truth(args.ground_truth)
        report = evaluate(aog, store, gt, stats)
        doc["metrics"] = {
            "mean_norm_dist": report.mean_norm_dist,
            "pcp_percent": report.pcp_percent,
            "rows": len(report.rows),
            "absent_count": report.absent_count,
        }
        if args.csv is not None:
            write_report_csv(report, args.csv)
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    print("parsed %d images into %s" % (len(parses), args.out))
    if doc["metrics"] is not None:
        print(
            "mean normalized distance %.4f, PCP %.1f"
            % (doc["metrics"]["mean_norm_dist"], doc["metrics"]["pcp_percent"])
        )
    return 0


def cmd_eval(args) -> int:
    store = _load_store(args.manifest)
    aog = load_graph(args.aog)
    stats = _stats_for_graph(aog, store)
    gt = read_ground_truth(args.ground_truth)
    report = evaluate(aog, store, gt, stats)
    write_report_json(report, args.out)
    if args.csv is not None:
        write_report_csv(report, args.csv)
    if report.empty:
        print("no part-bearing images evaluated (aggregates undefined)")
    else:
        print(
            "%d images: mean normalized distance %.4f, PCP %.1f"
            % (len(report.rows), report.mean_norm_dist, report.pcp_percent)
        )
    return 0


def cmd_compare(args) -> int:
    bench = standard_benchmark()
    synth = replace(bench.synth, num_images=args.images, noise=args.noise)
    qa = replace(bench.qa, mode=args.mode)
    bench = replace(bench, synth=synth, qa=qa, holdout_images=args.holdout)
    seeds = list(range(args.first_seed, args.first_seed + args.seeds))
    result = compare_policies(bench, args.budgets, seeds)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_curves_csv(result, out_dir / "curves.csv")
    (out_dir / "discovery.json").write_text(
        json.dumps(result.discovery, sort_keys=True, indent=1) + "\n"
    )
    for policy in sorted(result.curves):
        curve = result.curves[policy]
        line = ", ".join("%d: %.4f" % (p.budget, p.mean) for p in curve.points)
        print("%s  %s" % (policy.ljust(7), line))
    print("wrote %s and %s" % (out_dir / "curves.csv", out_dir / "discovery.json"))
    return 0


def cmd_qa_simulate(args) -> int:
    store = _load_store(args.manifest)
    gt = read_ground_truth(args.ground_truth)
    config = _qa_config_from_args(args)
    session = QaSession(store, config)
    oracle = SimulatedOracle(gt, iou_threshold=config.iou_threshold)
    selector = random_selector if args.policy == "random" else active_selector
    trace = run_loop(session, oracle, args.budget, selector=selector)
    if args.trace is not None:
        write_trace(trace, args.trace)
    if args.session is not None:
        save_session(session, args.session)
    print(
        "%d questions, %d annotations, %d templates, final loss %.6f"
        % (
            trace.questions_asked,
            trace.annotations_placed,
            len(session.aog),
            session.loss_history[-1] if session.loss_history else float("nan"),
        )
    )
    return 0


def cmd_qa_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    config = _qa_config_from_args(args)
    app = create_app(
        args.session,
        manifest_path=args.manifest,
        config=config,
        frontend_dir=args.frontend,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_qa_next(args) -> int:
    import httpx

    r = httpx.get(
        args.url.rstrip("/") + "/v1/next-question",
        params={"session": args.session},
        timeout=args.timeout,
    )
    print(json.dumps(r.json(), indent=1, sort_keys=True))
    return 0 if r.status_code == 200 else 1


def cmd_qa_answer(args) -> int:
    import httpx

    payload = {
        "image_id": args.image_id,
        "step": args.step,
        "kind": args.kind,
        "box": args.box,
        "template_label": args.label,
        "flipped": args.flipped,
    }
    r = httpx.post(
        args.url.rstrip("/") + "/v1/answer",
        params={"session": args.session},
        json=payload,
        timeout=args.timeout,
    )
    print(json.dumps(r.json(), indent=1, sort_keys=True))
    return 0 if r.status_code == 200 else 1


# --- parser ------------------------------------------------------------------


def build_parser(defaults: dict[str, str] | None = None) -> argparse.ArgumentParser:
    defaults = defaults or {}
    parser = argparse.ArgumentParser(prog="partaog", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def new_sub(parent, name, fn, **kw):
        sp = parent.add_parser(name, **kw)
        sp.set_defaults(func=fn)
        h = _Args(sp, defaults)
        h.add("--config", default=None, help="key=value file supplying flag defaults")
        return h

    h = new_sub(sub, "synth", cmd_synth, help="generate a synthetic dataset")
    h.add("--out", required=True)
    h.add("--seed", type=int, default=0)
    h.add("--images", type=int, default=200)
    h.add("--grid-h", type=int, default=16)
    h.add("--grid-w", type=int, default=16)
    h.add("--channels", type=int, default=6)
    h.add("--stride", type=float, default=8.0)
    h.add("--noise", type=float, default=0.5)
    h.add("--bump-sigma", type=float, default=1.5)
    h.add("--center-jitter", type=int, default=2)
    h.add("--flip-fraction", type=float, default=0.0)
    h.add("--absent-fraction", type=float, default=0.0)
    h.add("--layout", default=None, help="JSON file of template layouts")

    h = new_sub(sub, "stats", cmd_stats, help="per-channel activation statistics")
    h.add("--manifest", required=True)
    h.add("--out", required=True)

    h = new_sub(sub, "mine", cmd_mine, help="build a graph from an annotation file")
    h.add("--manifest", required=True)
    h.add("--annotations", required=True)
    h.add("--out", required=True)
    h.add("--part-name", default="part")
    _add_mining_flags(h)

    h = new_sub(sub, "parse", cmd_parse, help="localize the part on every image")
    h.add("--manifest", required=True)
    h.add("--aog", required=True)
    h.add("--out", required=True)
    h.add("--ground-truth", default=None, help="attach metrics computed against this file")
    h.add("--csv", default=None, help="also write per-image metric rows as CSV")

    h = new_sub(sub, "eval", cmd_eval, help="evaluate a graph against ground truth")
    h.add("--manifest", required=True)
    h.add("--aog", required=True)
    h.add("--ground-truth", required=True)
    h.add("--out", required=True)
    h.add("--csv", default=None)

    h = new_sub(sub, "compare", cmd_compare, help="active vs random annotation efficiency")
    h.add("--out-dir", required=True)
    h.add("--seeds", type=int, default=20)
    h.add("--first-seed", type=int, default=0)
    h.add("--budgets", type=int, nargs="+", default=[5, 10, 15, 20])
    h.add("--images", type=int, default=200)
    h.add("--holdout", type=int, default=100)
    h.add("--noise", type=float, default=0.5)
    h.add("--mode", choices=("simplified", "full_kl"), default="simplified")

    qa = sub.add_parser("qa", help="question-answering loop").add_subparsers(
        dest="qa_command", required=True
    )

    h = new_sub(qa, "simulate", cmd_qa_simulate, help="run the loop against the oracle")
    h.add("--manifest", required=True)
    h.add("--ground-truth", required=True)
    h.add("--budget", type=int, required=True)
    h.add("--policy", choices=("active", "random"), default="active")
    h.add("--trace", default=None, help="write the per-question trace (JSONL)")
    h.add("--session", default=None, help="persist the final session document here")
    _add_qa_flags(h)

    h = new_sub(qa, "serve", cmd_qa_serve, help="start the HTTP session service")
    h.add("--session", required=True, help="session document (created if absent)")
    h.add("--manifest", default=None, help="dataset manifest, required for a new session")
    h.add("--host", default=DEFAULT_HOST)
    h.add("--port", type=int, default=DEFAULT_PORT)
    h.add("--frontend", default=None, help="static UI directory to mount at /")
    _add_qa_flags(h)

    h = new_sub(qa, "next", cmd_qa_next, help="fetch the next question from a server")
    h.add("--url", default=DEFAULT_URL)
    h.add("--session", default="default")
    h.add("--timeout", type=float, default=120.0)

    h = new_sub(qa, "answer", cmd_qa_answer, help="submit an answer to a server")
    h.add("--url", default=DEFAULT_URL)
    h.add("--session", default="default")
    h.add("--timeout", type=float, default=120.0)
    h.add("--image-id", required=True)
    h.add("--step", type=int, required=True)
    h.add("--kind", required=True, choices=(
        "correct", "wrong_location", "wrong_template", "new_template", "part_absent"
    ))
    h.add("--box", type=float, nargs=4, default=None, metavar=("X", "Y", "W", "H"))
    h.add("--label", default=None)
    h.add("--flipped", action="store_true")

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if getattr(args, "config", None):
        defaults = read_config_file(args.config)
        args = build_parser(defaults).parse_args(argv)
    try:
        return args.func(args)
    except PartAogError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
