"""Relative input importance from connection weights of a one-output MLP.

The signed variant sums input->hidden times hidden->output weight products
over the hidden layer and normalizes by the total absolute contribution, so
a negative value marks an input that pushes the output toward FALSE. The
unsigned variant is Garson's original absolute-share computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from courtside.mlp import Mlp


@dataclass(frozen=True)
class RelativeImportance:
    features: tuple[str, ...]  # sorted by descending value
    values: tuple[float, ...]  # percent; sum of magnitudes is 100 unless degenerate
    degenerate: bool = False  # every contribution was zero

    def by_feature(self) -> dict[str, float]:
        return dict(zip(self.features, self.values))

    def render(self) -> str:
        """One line per input; the sign says which class the weight products favour."""
        if self.degenerate:
            return "all connection-weight contributions are zero\n"
        w = max(len(f) for f in self.features)
        return "".join(
            f"{f:<{w}} {v:+8.3f}%  {'toward TRUE' if v > 0 else 'toward FALSE' if v < 0 else 'neutral'}\n"
            for f, v in zip(self.features, self.values)
        )

    def to_csv(self) -> str:
        lines = ["feature,signed_percent"]
        lines += [f"{f},{v!r}" for f, v in zip(self.features, self.values)]
        return "\n".join(lines) + "\n"


def contributions(net: Mlp, signed: bool = True) -> np.ndarray:
    """Unnormalized per-input contributions; bias weights are ignored."""
    if net.q != 1:
        raise ValueError(f"importance needs a single-output network, got q={net.q}")
    w_in = net.W1[:, :-1]  # (h, p)
    w_out = net.W2[0, :-1]  # (h,)
    if signed:
        return w_in.T @ w_out
    # each hidden node's output weight is shared out by the inputs' absolute weight shares
    share = np.abs(w_in) / np.abs(w_in).sum(axis=1, keepdims=True).clip(min=np.finfo(float).tiny)
    return share.T @ np.abs(w_out)


def garson_importance(
    net: Mlp,
    feature_names: Sequence[str] | None = None,
    signed: bool = True,
) -> RelativeImportance:
    names = tuple(feature_names) if feature_names is not None else tuple(f"I{i + 1}" for i in range(net.p))
    if len(names) != net.p:
        raise ValueError(f"{len(names)} feature names for a network with {net.p} inputs")
    c = contributions(net, signed)
    total = float(np.abs(c).sum())
    degenerate = total == 0.0
    values = np.zeros_like(c) if degenerate else 100.0 * c / total
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return RelativeImportance(
        tuple(names[i] for i in order),
        tuple(float(values[i]) for i in order),
        degenerate,
    )


def to_svg(imp: RelativeImportance, width: int = 640, bar_height: int = 18) -> str:
    """Horizontal bar chart, one bar per input, positive bars right of the axis."""
    label_w = 70
    pad = 10
    n = len(imp.values)
    height = 2 * pad + n * bar_height
    span = max((abs(v) for v in imp.values), default=0.0) or 1.0
    half = (width - label_w - 2 * pad) / 2
    axis_x = label_w + pad + half
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="Helvetica" font-size="11">',
        f'<line x1="{axis_x:.1f}" y1="{pad}" x2="{axis_x:.1f}" y2="{height - pad}" stroke="black"/>',
    ]
    for k, (name, v) in enumerate(zip(imp.features, imp.values)):
        y = pad + k * bar_height
        w = abs(v) / span * half
        x = axis_x if v >= 0 else axis_x - w
        fill = "#333333" if v >= 0 else "#999999"
        out.append(f'<text x="{label_w}" y="{y + bar_height * 0.7:.1f}" text-anchor="end">{name}</text>')
        out.append(
            f'<rect x="{x:.2f}" y="{y + 2}" width="{w:.2f}" height="{bar_height - 4}" fill="{fill}">'
            f"<title>{name}: {v:.3f}%</title></rect>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
