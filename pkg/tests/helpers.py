"""Builders shared by the test modules."""

import math


from roadprio.geometry import Section, ShapeLabel


def arc_xy(radius, n, step=1.0, left=True):
    """``n`` points on a circle, ``step`` metres of arc apart."""
    dphi = step / radius
    sign = 1.0 if left else -1.0
    return [(radius * math.sin(i * dphi), sign * radius * (1 - math.cos(i * dphi))) for i in range(n)]


def make_section(sid, kappa, shape=None, road_id=None, arc_length=None):
    kappa = tuple(float(k) for k in kappa)
    if shape is None:
        shape = ShapeLabel.LEFT if kappa and kappa[0] > 0 else ShapeLabel.RIGHT
    return Section(
        id=sid,
        road_id=road_id or sid.split(":")[0],
        shape=shape,
        start_index=0,
        end_index=len(kappa) + 1,
        curvature_seq=kappa,
        arc_length=float(len(kappa) + 1) if arc_length is None else arc_length,
    )
