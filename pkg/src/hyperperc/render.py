"""SVG pictures of a site configuration and its derived layers.

Layer styling: the agreement bonds phi live in blue (open solid, closed
dotted), the dual bonds phi_plus in green with the same open/closed coding,
the interface eta in red, sites as filled (state 1) or hollow (state 0)
dots.  Output is a pure function of the inputs, formatted to fixed
precision, so a rerun is byte-identical.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .clusters import SiteConfig
from .contours import derive, tables_for
from .errors import DomainError
from .planar_map import CombinatorialMap, embed

LAYERS = ("phi", "phi_plus", "eta", "sites")

_PHI_COLOR = "#2e6fb7"
_PHI_PLUS_COLOR = "#3a9d4e"
_ETA_COLOR = "#c93b3b"
_SITE_ON = "#1a1a1a"
_SITE_OFF = "#ffffff"
_SITE_RIM = "#6b6b6b"
_DISK = "#c7c7c7"


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _line(x1, y1, x2, y2, color: str, width: float,
          dashed: bool = False) -> str:
    dash = ' stroke-dasharray="%s"' % _fmt(width * 2.5) if dashed else ""
    return (f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash}/>')


def _positions(m: CombinatorialMap) -> Dict[str, np.ndarray]:
    """Primal, interior-face and edge-midpoint coordinates as complex."""
    xy = embed(m)
    z = xy[:, 0] + 1j * xy[:, 1]
    n_int = m.n_faces - 1
    fc = np.zeros(n_int, dtype=complex)
    for f in range(n_int):
        vs = m.face_vertices(f)
        fc[f] = z[vs].mean()
    ends = m.edge_endpoints()
    mid = 0.5 * (z[ends[:, 0]] + z[ends[:, 1]])
    return {"vertex": z, "face": fc, "midpoint": mid}


def render_svg(omega: SiteConfig, width: int = 720,
               include: Sequence[str] = LAYERS) -> str:
    """Draw the configuration in the Poincare disk (or plane).

    Interface segments incident to the outer face are omitted: they close
    up only beyond the drawn ball.
    """
    for name in include:
        if name not in LAYERS:
            raise DomainError(f"unknown layer {name!r}")
    m = omega.map
    t = tables_for(m)
    cfgs = derive(omega)
    pos = _positions(m)
    z = pos["vertex"]

    pts = [z]
    if "phi_plus" in include or "eta" in include:
        pts.append(pos["face"])
    allz = np.concatenate(pts)
    lo_x, hi_x = float(allz.real.min()), float(allz.real.max())
    lo_y, hi_y = float(allz.imag.min()), float(allz.imag.max())
    hyperbolic = bool((np.abs(allz) < 1.0 + 1e-9).all())
    if hyperbolic:
        lo_x, hi_x, lo_y, hi_y = -1.0, 1.0, -1.0, 1.0
    pad = 0.06 * max(hi_x - lo_x, hi_y - lo_y, 1e-9)
    vb = (lo_x - pad, lo_y - pad,
          (hi_x - lo_x) + 2 * pad, (hi_y - lo_y) + 2 * pad)
    stroke = vb[2] / 360.0
    dot = stroke * 2.2

    out: List[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{width}" viewBox="{_fmt(vb[0])} {_fmt(vb[1])} '
        f'{_fmt(vb[2])} {_fmt(vb[3])}">')
    if hyperbolic:
        out.append(f'<circle cx="0.0000" cy="0.0000" r="1.0000" '
                   f'fill="none" stroke="{_DISK}" '
                   f'stroke-width="{_fmt(stroke)}"/>')

    if "phi" in include:
        out.append('<g id="phi">')
        open_e = cfgs.phi.open_edges
        ends = t.ends
        for e in range(m.n_edges):
            a, b = z[ends[e, 0]], z[ends[e, 1]]
            out.append(_line(a.real, a.imag, b.real, b.imag, _PHI_COLOR,
                             stroke * (1.6 if open_e[e] else 0.8),
                             dashed=not open_e[e]))
        out.append('</g>')

    if "phi_plus" in include:
        out.append('<g id="phi-plus">')
        fc = pos["face"]
        open_e = cfgs.phi_plus.open_edges
        for e, (f1, f2) in zip(t.dual_int_edges, t.dual_int_ends):
            a, b = fc[f1], fc[f2]
            out.append(_line(a.real, a.imag, b.real, b.imag,
                             _PHI_PLUS_COLOR,
                             stroke * (1.6 if open_e[e] else 0.8),
                             dashed=not open_e[e]))
        out.append('</g>')

    if "eta" in include:
        out.append('<g id="eta">')
        bar = cfgs.maps.bar
        centroids = _bar_face_centroids(m, cfgs.maps, pos)
        ends = t.bar_dual_ends
        outer = bar.outer_face
        for e in np.flatnonzero(cfgs.eta.open_edges):
            f1, f2 = int(ends[e, 0]), int(ends[e, 1])
            if f1 == outer or f2 == outer:
                continue
            a, b = centroids[f1], centroids[f2]
            out.append(_line(a.real, a.imag, b.real, b.imag, _ETA_COLOR,
                             stroke * 2.0))
        out.append('</g>')

    if "sites" in include:
        out.append('<g id="sites">')
        for v in range(m.n_vertices):
            fill = _SITE_ON if omega.states[v] else _SITE_OFF
            out.append(f'<circle cx="{_fmt(z[v].real)}" '
                       f'cy="{_fmt(z[v].imag)}" r="{_fmt(dot)}" '
                       f'fill="{fill}" stroke="{_SITE_RIM}" '
                       f'stroke-width="{_fmt(stroke * 0.7)}"/>')
        out.append('</g>')

    out.append('</svg>')
    return "\n".join(out) + "\n"


def _bar_face_centroids(m: CombinatorialMap, sup, pos) -> np.ndarray:
    """Centroid per superposition face, from the three vertex classes."""
    coords = np.concatenate((pos["vertex"], pos["face"], pos["midpoint"]))
    bar = sup.bar
    cents = np.zeros(bar.n_faces, dtype=complex)
    for f in range(bar.n_faces):
        vs = bar.face_vertices(f)
        cents[f] = coords[vs].mean()
    return cents
