"""Command-line front end: gen / train / infer / baseline / eval / render.

Exit codes: 0 success, 1 user or domain error, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evaluation, inference, maxent, synthgen
from .gridmap import FormatError, OccupancyGrid, SemanticMap, load_map, load_occupancy
from .gridmap import save_occupancy, walkable_mask

log = logging.getLogger("occprior")


def _hyper_from_args(args) -> maxent.IocmmHyper:
    return maxent.IocmmHyper(
        traj_batch=args.bt,
        map_batch=args.bm,
        alpha=args.alpha,
        lam=args.lam,
        epsilon=args.eps,
        max_iters=args.iters,
        vi_max_sweeps=args.sweeps,
        train_rollouts=args.rollouts,
    )


def _add_hyper_flags(p: argparse.ArgumentParser):
    p.add_argument("--bt", type=int, default=10, help="trajectory batch size")
    p.add_argument("--bm", type=int, default=7, help="map batch size")
    p.add_argument("--alpha", type=float, default=0.1, help="policy temperature")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="learning rate")
    p.add_argument("--r0", type=float, default=0.01, help="base step cost")
    p.add_argument("--eps", type=float, default=1e-3, help="gradient-norm stop threshold")
    p.add_argument("--iters", type=int, default=300, help="max training iterations")
    p.add_argument("--sweeps", type=int, default=None,
                   help="value-iteration sweep cap (default 4*(w+h))")
    p.add_argument("--rollouts", type=int, default=5,
                   help="rollouts per demonstration during training")


def _cycle_values(text, cast):
    return [cast(tok) for tok in text.split(",") if tok != ""]


def cmd_gen(args) -> int:
    if args.maps < 1:
        raise ValueError("maps must be ≥ 1")
    spec = synthgen.GeneratorSpec(
        width=args.width, height=args.height, seed=args.seed,
        trajectories_per_map=args.trajs,
    )
    variations = []
    roads = _cycle_values(args.roads, int) if args.roads else []
    densities = _cycle_values(args.density, float) if args.density else []
    n = max(len(roads), len(densities))
    for i in range(n):
        v = {}
        if roads:
            v["road_count"] = roads[i % len(roads)]
        if densities:
            v["obstacle_density"] = densities[i % len(densities)]
        variations.append(v)
    manifest = synthgen.build_dataset(args.maps, spec, args.out, variations)
    print(manifest)
    return 0


def cmd_train(args) -> int:
    samples = synthgen.load_dataset(args.data)
    hyper = _hyper_from_args(args)
    if hyper.lam == 0:
        log.warning("no learning: lambda is 0, theta stays at its start value")
    model0 = maxent.ThetaModel.uniform(samples[0].grid_map.classes.names, r0=args.r0)
    rng = np.random.default_rng(args.seed)
    model, records = maxent.train_iocmm(samples, hyper, model0=model0, rng=rng)
    model = replace(model, endpoint_prior=maxent.learn_endpoint_prior(samples))
    maxent.save_theta(model, args.out)
    grad_norm = records[-1].grad_norm if records else float("nan")
    theta_text = " ".join(
        f"{n}={v:.4f}" for n, v in zip(model.class_names, model.theta)
    )
    print(f"gradient norm: {grad_norm:.6g} after {len(records)} iterations")
    print(f"theta: {theta_text}")
    print(args.out)
    return 0


def _strategy(name: str) -> str:
    return {"learned": "learned", "softmax": "softmax_cost"}[name]


def cmd_infer(args) -> int:
    grid_map = load_map(args.map)
    model = maxent.load_theta(args.model)
    hyper = maxent.IocmmHyper(alpha=args.alpha, vi_max_sweeps=args.sweeps)
    rng = np.random.default_rng(args.seed)
    occ, truncated = inference.iocmm_infer(
        grid_map, model, strategy=_strategy(args.strategy), n_traj=args.ntraj,
        hyper=hyper, rng=rng,
    )
    save_occupancy(occ, args.out)
    print(f"truncated rollouts: {truncated}/{args.ntraj}")
    print(args.out)
    return 0


def cmd_baseline(args) -> int:
    grid_map = load_map(args.map)
    if args.kind == "uniform":
        occ = inference.baseline_uniform(grid_map)
    elif args.kind == "walkable":
        occ = inference.baseline_uniform_walkable(grid_map)
    else:
        if not args.data:
            raise ValueError("classprior baseline needs --data MANIFEST")
        samples = synthgen.load_dataset(args.data)
        occ = inference.baseline_class_prior(samples, grid_map)
    save_occupancy(occ, args.out)
    print(args.out)
    return 0


def cmd_eval(args) -> int:
    samples = synthgen.load_dataset(args.data)
    hyper = _hyper_from_args(args)
    methods = evaluation.METHODS if args.method == "all" else (args.method,)
    results = []
    for method in methods:
        result = evaluation.leave_one_out(
            samples, method, hyper=hyper, smoothing=args.smoothing,
            seed=args.seed, n_traj=args.ntraj, strategy=_strategy(args.strategy),
            r0=args.r0,
        )
        results.append(result)
        print(result.summary())
    evaluation.write_scores_csv(results, args.out)
    print(args.out)
    return 0


def render_pgm(occ: OccupancyGrid, path, grid_map: SemanticMap | None = None):
    """8-bit binary PGM, occupancy scaled [0, max] -> [0, 255].

    With a map, unwalkable cells render at fixed mid-gray for orientation.
    """
    vmax = float(occ.values.max())
    if vmax > 0:
        img = np.round(occ.values / vmax * 255.0).astype(np.uint8)
    else:
        img = np.zeros((occ.height, occ.width), dtype=np.uint8)
    if grid_map is not None:
        if (grid_map.width, grid_map.height) != (occ.width, occ.height):
            raise ValueError("map and occupancy dimensions differ")
        img[~walkable_mask(grid_map)] = 128
    header = f"P5\n{occ.width} {occ.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def cmd_render(args) -> int:
    occ = load_occupancy(args.occ)
    grid_map = load_map(args.map) if args.map else None
    render_pgm(occ, args.out, grid_map)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="occprior",
        description="Occupancy priors of walking pedestrians on semantic grid maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--maps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--trajs", type=int, default=30)
    p.add_argument("--roads", default="",
                   help="comma-separated road counts cycled over maps")
    p.add_argument("--density", default="",
                   help="comma-separated obstacle densities cycled over maps")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="learn per-class costs from a dataset")
    p.add_argument("--data", required=True, help="dataset manifest")
    p.add_argument("--out", required=True, help="output .theta model")
    p.add_argument("--seed", type=int, default=0)
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="predict an occupancy prior for a map")
    p.add_argument("--map", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ntraj", type=int, default=500)
    p.add_argument("--strategy", choices=("learned", "softmax"), default="learned")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--sweeps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("baseline", help="compute a baseline prediction")
    p.add_argument("--kind", choices=("uniform", "walkable", "classprior"), required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--data", help="manifest for the classprior baseline")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="leave-one-out KL-divergence benchmark")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=evaluation.METHODS + ("all",), default="all")
    p.add_argument("--out", required=True, help="results .csv")
    p.add_argument("--ntraj", type=int, default=500)
    p.add_argument("--strategy", choices=("learned", "softmax"), default="learned")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--smoothing", type=float, default=evaluation.DEFAULT_SMOOTHING)
    p.add_argument("--seed", type=int, default=0)
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render an occupancy grid as a PGM heatmap")
    p.add_argument("--occ", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map", default=None)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {e!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
