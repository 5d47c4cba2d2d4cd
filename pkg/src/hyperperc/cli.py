"""Command-line surface.

Subcommands: tiling-build, tiling-classify, sample, sweep, oracle, render,
thresholds.  Every command is a pure function of its flags (plus --seed
where randomness is involved), so repeated invocations are byte-identical.
Exit codes: 0 success, 1 runtime failure, 2 bad usage or config, 3 budget.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from .errors import (BudgetExceeded, ConfigError, DomainError,
                     HyperpercError)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="hyperperc",
        description="Percolation, Ising, FK and XOR laboratory on "
                    "vertex-transitive planar balls.")
    sub = top.add_subparsers(dest="command", required=True)

    b = sub.add_parser("tiling-build", help="write a {p,q} ball as text")
    b.add_argument("--p", type=int, required=True, help="face size")
    b.add_argument("--q", type=int, required=True, help="vertex degree")
    b.add_argument("--radius", type=int, required=True)
    b.add_argument("--out", required=True)

    c = sub.add_parser("tiling-classify",
                       help="curvature class of a vertex type")
    c.add_argument("--degrees", required=True,
                   help="comma-separated face sizes around a vertex")

    s = sub.add_parser("sample", help="draw one configuration and report "
                                      "clusters and contours")
    s.add_argument("--model", required=True,
                   choices=("bernoulli", "ising", "fk", "xor"))
    s.add_argument("--map", dest="map_path", required=True)
    s.add_argument("--J", type=float, default=None)
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--boundary", default="free",
                   choices=("free", "plus", "minus", "wired"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sweeps", type=int, default=100)
    s.add_argument("--out", default=None,
                   help="write here instead of stdout")

    w = sub.add_parser("sweep", help="run an experiment config to JSONL")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True)

    o = sub.add_parser("oracle", help="exact checks on tiny graphs")
    o.add_argument("--check", required=True, choices=("coupling",))
    o.add_argument("--graph", required=True,
                   choices=("k2", "triangle", "star4", "star5", "grid33",
                            "ball44r1"))
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--boundary", default="free", choices=("free", "wired"))

    t = sub.add_parser("thresholds", help="closed-form height and coupling "
                                          "bounds from a site threshold")
    t.add_argument("--pc", type=float, required=True)
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--J", type=float, default=0.0)
    t.add_argument("--pcw", type=float, default=None,
                   help="wired threshold, if separately known")

    r = sub.add_parser("render", help="draw a configuration as SVG")
    r.add_argument("--map", dest="map_path", required=True)
    r.add_argument("--config", required=True,
                   help="site configuration text file")
    r.add_argument("--out", required=True)
    r.add_argument("--layers", default="phi,phi_plus,eta,sites")
    r.add_argument("--width", type=int, default=720)
    return top


def _cmd_tiling_build(args) -> int:
    from .planar_map import TilingSpec, build_ball

    m = build_ball(TilingSpec.regular(args.p, args.q), args.radius)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(m.to_text())
    print(f"wrote {args.out}: {m.n_vertices} vertices, {m.n_edges} edges, "
          f"{m.n_faces} faces")
    return 0


def _cmd_tiling_classify(args) -> int:
    from .planar_map import TilingSpec

    sizes = tuple(int(x) for x in args.degrees.replace(",", " ").split())
    gc = TilingSpec(sizes).classify()
    print(f"{gc.geometry.value.capitalize()} (gap {gc.curvature_gap})")
    return 0


def _read_map(path: str):
    from .planar_map import CombinatorialMap

    with open(path, encoding="utf-8") as fh:
        return CombinatorialMap.from_text(fh.read())


def _cmd_sample(args) -> int:
    import numpy as np

    from .clusters import SiteConfig, SpinBoundary, label_site_clusters
    from .contours import (attach_proxy, derive, eta_structure_check,
                           phi_contours)
    from .samplers import (RngSpec, sample_bernoulli,
                           swendsen_wang_chain_batch)

    m = _read_map(args.map_path)
    rng = RngSpec(args.seed).generator()
    spin = {"free": SpinBoundary.FREE, "plus": SpinBoundary.PLUS,
            "minus": SpinBoundary.MINUS, "wired": SpinBoundary.FREE}
    need_j = args.model in ("ising", "xor")
    if need_j and args.J is None:
        raise ConfigError(f"--J is required for model {args.model}")
    if not need_j and args.p is None:
        raise ConfigError(f"--p is required for model {args.model}")

    if args.model == "bernoulli":
        if args.boundary != "free":
            raise ConfigError("bernoulli supports only the free boundary")
        omega = sample_bernoulli(m, args.p, rng)
    elif args.model == "ising":
        if args.boundary == "wired":
            raise ConfigError("wired boundary applies to bond models")
        bnd = spin[args.boundary]
        states = swendsen_wang_chain_batch(m, args.J, 1, args.sweeps, rng,
                                           boundary=bnd)
        omega = SiteConfig(m, states[0], bnd)
    elif args.model == "xor":
        if args.boundary == "wired":
            raise ConfigError("wired boundary applies to bond models")
        bnd = spin[args.boundary]
        s1 = swendsen_wang_chain_batch(m, args.J, 1, args.sweeps, rng,
                                       boundary=bnd)
        s2 = swendsen_wang_chain_batch(m, args.J, 1, args.sweeps, rng,
                                       boundary=bnd)
        out_bnd = (SpinBoundary.FREE if bnd is SpinBoundary.FREE
                   else SpinBoundary.PLUS)
        omega = SiteConfig(m, (1 - (s1[0] ^ s2[0])).astype(np.uint8),
                           out_bnd)
    else:
        if args.boundary in ("plus", "minus"):
            raise ConfigError("fk boundaries are free or wired")
        if not 0.0 < args.p < 1.0:
            raise DomainError(f"density {args.p} outside (0, 1)")
        from .samplers import _min_label_components, _uniform_spin_per_label

        coupling = -0.5 * math.log(1.0 - args.p)
        bnd = (SpinBoundary.FREE if args.boundary == "free"
               else SpinBoundary.PLUS)
        states = swendsen_wang_chain_batch(m, coupling, 1, args.sweeps, rng,
                                           boundary=bnd)
        ends = m.edge_endpoints()
        agree = states[:, ends[:, 0]] == states[:, ends[:, 1]]
        opened = agree & (rng.random(agree.shape) < args.p)
        glue = (m.boundary_vertices if args.boundary == "wired" else None)
        labels = _min_label_components(opened, ends, m.n_vertices, glue)
        omega = SiteConfig(m, _uniform_spin_per_label(labels, rng)[0],
                           SpinBoundary.FREE)

    clusters = attach_proxy(label_site_clusters(omega), omega)
    phi_report = phi_contours(omega)
    eta_report = eta_structure_check(derive(omega))
    reports = json.dumps({
        "clusters": clusters.to_json_dict(),
        "phi_contours": phi_report.to_json_dict(),
        "eta_contours": eta_report.to_json_dict(),
    }, sort_keys=True)
    text = omega.to_text() + reports + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    from .experiments import parse_config, run_sweep, write_records

    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    n = write_records(run_sweep(cfg), args.out)
    print(f"wrote {n} records to {args.out}")
    return 0


def _cmd_oracle(args) -> int:
    from . import graphs
    from .clusters import BondBoundary
    from .oracle import coupling_check

    if args.graph == "ball44r1":
        from .planar_map import TilingSpec, build_ball

        g = build_ball(TilingSpec.regular(4, 4), 1)
    else:
        g = {"k2": graphs.k2, "triangle": graphs.triangle,
             "star4": lambda: graphs.star_n(4),
             "star5": lambda: graphs.star_n(5),
             "grid33": lambda: graphs.grid(3, 3)}[args.graph]()
    boundary = (BondBoundary.WIRED if args.boundary == "wired"
                else BondBoundary.FREE)
    report = coupling_check(g, args.p, boundary)
    print(str(report))
    print("PASS" if report.tv <= 1e-10 else "FAIL")
    return 0 if report.tv <= 1e-10 else 1


def _cmd_thresholds(args) -> int:
    from .samplers import CouplingParams, thresholds

    params = CouplingParams(J=args.J, d=args.d)
    rep = thresholds(params, args.pc, args.pcw)
    def show(name, val):
        if val is None:
            print(f"{name} = n/a")
        elif isinstance(val, tuple):
            print(f"{name} = ({val[0]:.6f}, {val[1]:.6f})")
        else:
            print(f"{name} = {val:.6f}")
    show("h_ising", rep.h_ising)
    show("h_xor", rep.h_xor)
    show("J_max", rep.j_max_ising)
    show("J_max_xor", rep.j_max_xor)
    show("wired_lower_bound", rep.wired_lower_bound)
    show("J_bound_wired", rep.j_bound_wired)
    show("ising_window", rep.ising_window)
    show("xor_window", rep.xor_window)
    return 0


def _cmd_render(args) -> int:
    from .clusters import SiteConfig
    from .render import render_svg

    m = _read_map(args.map_path)
    with open(args.config, encoding="utf-8") as fh:
        omega = SiteConfig.from_text(m, fh.read())
    layers = tuple(x for x in args.layers.replace(",", " ").split() if x)
    svg = render_svg(omega, width=args.width, include=layers)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return 0


_DISPATCH = {
    "tiling-build": _cmd_tiling_build,
    "tiling-classify": _cmd_tiling_classify,
    "sample": _cmd_sample,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "thresholds": _cmd_thresholds,
    "render": _cmd_render,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2
    except (HyperpercError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
