"""
render
~~~~~~

Draw a two dimensional net as SVG 1.1: one period cell, the edges starting
in it, the vertices, and the tension ellipse `{x : x^T T_w^(-1) x = 1}`
centred on the cell, where `T_w` is the tension per unit weight.  A round
ellipse means the net pulls equally in all directions.

Uses, optionally, `shapely` to compute the extent of the drawing.
"""

import collections as _collections
import logging
import math as _math
import xml.etree.ElementTree as _ET
import numpy as _np

from . import deform as _deform
from . import net as _net
from . import solver as _solver
from .utils import lattice as _lattice

_logger = logging.getLogger(__name__)

try:
    import shapely.affinity as _affinity
    import shapely.geometry as _geometry
    import shapely.ops as _ops
except Exception as ex:
    _logger.warning("Failed to load shapely, caused by: %s/%s", type(ex), ex)
    _geometry = None

_SVG_NAMESPACE = "http://www.w3.org/2000/svg"

TensionEllipse = _collections.namedtuple("TensionEllipse", ["centre", "rx", "ry", "angle"])


def tension_ellipse(graph, realization):
    """The tension ellipse: centre `rho((1/2, ..., 1/2))`, semi-axes the
    square roots of the eigenvalues of `T_w` (largest first), and the angle
    in degrees of the major axis."""
    values, vectors = _lattice.symmetric_eigh(_solver.per_weight_tension(graph, realization))
    if values[0] < 0:
        raise _solver.SingularSystemError("Tension {} is not positive semi-definite".format(values.tolist()))
    centre = realization.period.vector([0.5] * realization.period.dimension)
    major = vectors[:, -1]
    angle = _math.degrees(_math.atan2(major[1], major[0]))
    return TensionEllipse(centre, _math.sqrt(values[-1]), _math.sqrt(values[0]), angle)


def _segments(graph, realization):
    segments, loops = [], []
    for e in graph.edges:
        if e.weight == 0:
            continue
        start = realization.positions[e.tail]
        if _net.is_true_loop(e):
            loops.append((start, e.weight))
        else:
            segments.append((start, start + realization.edge_vector(e), e.weight))
    return segments, loops


def _bounds(cell, segments, loops, ellipse, radius):
    if _geometry is not None:
        shapes = [_geometry.Polygon(cell)]
        shapes.extend(_geometry.LineString([a, b]) for a, b, _ in segments)
        shapes.extend(_geometry.Point(x).buffer(radius) for x, _ in loops)
        circle = _geometry.Point(ellipse.centre).buffer(1.0)
        shape = _affinity.scale(circle, ellipse.rx, ellipse.ry, origin=tuple(ellipse.centre))
        shapes.append(_affinity.rotate(shape, ellipse.angle, origin=tuple(ellipse.centre)))
        return _ops.unary_union(shapes).bounds
    points = [cell] + [_np.array([a, b]) for a, b, _ in segments]
    points.append(_np.array([x for x, _ in loops]).reshape((-1, 2)))
    extent = max(ellipse.rx, ellipse.ry)
    points.append(_np.array([ellipse.centre - extent, ellipse.centre + extent]))
    points = _np.vstack(points)
    low, high = points.min(axis=0) - radius, points.max(axis=0) + radius
    return (low[0], low[1], high[0], high[1])


def _number(x):
    return "{:.17g}".format(float(x))


def render_svg(graph=None, realization=None, out=None, trace=None, title=None):
    """Draw the net.

    :param graph: The :class:`net.QuotientGraph`, or `None` if `trace` given.
    :param realization: The :class:`net.Realization` to draw.
    :param out: Optional filename or file-like object to write to.
    :param trace: Optional :class:`deform.DeformationTrace`; its final graph
      and realization are drawn, titled with the energy loss ratio.

    :return: The SVG document as a string.
    """
    if trace is not None:
        graph, realization = trace.final_graph, trace.final_realization
        if realization is None:
            raise ValueError("Trace has no final realization to draw")
        if title is None:
            title = "R = {:.6g}".format(_deform.energy_loss_ratio(trace))
    if graph.dimension != 2:
        raise ValueError("Can only draw two dimensional nets, not dimension {}".format(graph.dimension))
    basis = realization.period.basis
    cell = _np.array([[0.0, 0.0], basis[:, 0], basis[:, 0] + basis[:, 1], basis[:, 1]])
    segments, loops = _segments(graph, realization)
    ellipse = tension_ellipse(graph, realization)
    size = min(_np.linalg.norm(basis[:, 0]), _np.linalg.norm(basis[:, 1]))
    radius = 0.04 * size
    xmin, ymin, xmax, ymax = _bounds(cell, segments, loops, ellipse, 3 * radius)
    margin = 0.05 * max(xmax - xmin, ymax - ymin)
    xmin, ymin, xmax, ymax = xmin - margin, ymin - margin, xmax + margin, ymax + margin

    svg = _ET.Element("svg", {"xmlns": _SVG_NAMESPACE, "version": "1.1",
        "width": "600", "height": _number(600 * (ymax - ymin) / (xmax - xmin)),
        "viewBox": " ".join(_number(x) for x in (xmin, -ymax, xmax - xmin, ymax - ymin))})
    if title is not None:
        _ET.SubElement(svg, "title").text = title
    group = _ET.SubElement(svg, "g", {"transform": "scale(1,-1)", "stroke-width": _number(radius / 3)})
    _ET.SubElement(group, "polygon", {"class": "cell", "fill": "none", "stroke": "#999999",
        "points": " ".join("{},{}".format(_number(x), _number(y)) for x, y in cell)})
    for a, b, w in segments:
        _ET.SubElement(group, "line", {"class": "edge", "stroke": "#000000",
            "x1": _number(a[0]), "y1": _number(a[1]), "x2": _number(b[0]), "y2": _number(b[1])})
    for x, w in loops:
        _ET.SubElement(group, "circle", {"class": "loop", "fill": "none", "stroke": "#0000cc",
            "cx": _number(x[0]), "cy": _number(x[1] + 2 * radius), "r": _number(2 * radius)})
    for x in realization.positions:
        _ET.SubElement(group, "circle", {"class": "vertex", "fill": "#cc0000",
            "cx": _number(x[0]), "cy": _number(x[1]), "r": _number(radius)})
    cx, cy = ellipse.centre
    _ET.SubElement(group, "ellipse", {"class": "tension", "fill": "none", "stroke": "#008800",
        "cx": _number(cx), "cy": _number(cy), "rx": _number(ellipse.rx), "ry": _number(ellipse.ry),
        "transform": "rotate({} {} {})".format(_number(ellipse.angle), _number(cx), _number(cy))})
    text = _ET.tostring(svg, encoding="unicode") + "\n"
    if out is not None:
        if isinstance(out, str):
            with open(out, "w", encoding="utf-8") as f:
                f.write(text)
        else:
            out.write(text)
    return text
