"""
netfile
~~~~~~~

Reading and writing nets, and deformation traces, as JSON.

A net file is a JSON object with keys:

- "dim": the rank `N`
- "vertices": list of vertex names (strings), one per vertex orbit
- "period": the `N x N` matrix whose columns are the images of the standard
  generators of `Z^N`, as a list of rows
- "edges": list of objects `{"from": name, "to": name, "offset": [ints],
  "weight": w}`
- optionally "positions": list of `N`-vectors, one per vertex

We write one edge per line, and floats with 17 significant digits, so that
parsing what we wrote recovers exactly the same graph and period.  Files
ending ".gz", ".xz" or ".bz2" are decompressed on the fly.
"""

import bz2 as _bz2
import collections as _collections
import gzip as _gzip
import json as _json
import lzma as _lzma
import math as _math
import numpy as _np

from . import deform as _deform
from . import mechanics as _mechanics
from . import moves as _moves
from . import net as _net

NetFile = _collections.namedtuple("NetFile", ["graph", "period", "names", "positions"])
NetFile.__new__.__defaults__ = (None, None)

_NET_KEYS = {"dim", "vertices", "period", "edges", "positions"}
_EDGE_KEYS = {"from", "to", "offset", "weight"}


class NetFileError(ValueError):
    """Malformed net or trace file."""
    pass


def open_file(file, mode):
    """Open a filename, decompressing by extension; otherwise return the
    file-like object itself.

    :return: Pair `(file, ours)` where `ours` says whether to close it.
    """
    if not isinstance(file, str):
        return file, False
    if file[-3:] == ".gz":
        return _gzip.open(file, mode=mode + "t", encoding="utf-8"), True
    if file[-3:] == ".xz":
        return _lzma.open(file, mode=mode + "t", encoding="utf-8"), True
    if file[-4:] == ".bz2":
        return _bz2.open(file, mode=mode + "t", encoding="utf-8"), True
    return open(file, mode, encoding="utf-8"), True


def _format_scalar(value):
    if value is None:
        return "null"
    if isinstance(value, (bool, _np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, _np.integer)):
        return "{}".format(int(value))
    if isinstance(value, (float, _np.floating)):
        if not _math.isfinite(value):
            raise ValueError("Cannot write non-finite number {}".format(value))
        return "{:.17g}".format(float(value))
    if isinstance(value, str):
        return _json.dumps(value)
    raise ValueError("Cannot write value {} of type {}".format(value, type(value)))


def _is_scalar(value):
    return not isinstance(value, (dict, list, tuple, _np.ndarray))


def _is_flat(value):
    """Scalars, and lists of scalars, only."""
    values = value.values() if isinstance(value, dict) else value
    return all(_is_scalar(v) or (not isinstance(v, dict) and all(_is_scalar(x) for x in v)) for v in values)


def dumps(value, indent=0):
    """JSON text in which containers holding only scalars are written on one
    line, and floats carry 17 significant digits."""
    if isinstance(value, _np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        value = {k: v.tolist() if isinstance(v, _np.ndarray) else v for k, v in value.items()}
        items = ["{}: {}".format(_json.dumps(str(k)), dumps(v, indent + 1)) for k, v in value.items()]
        if _is_flat(value):
            return "{" + ", ".join(items) + "}"
        pad = "  " * (indent + 1)
        return "{\n" + ",\n".join(pad + item for item in items) + "\n" + "  " * indent + "}"
    if isinstance(value, (list, tuple)):
        value = [v.tolist() if isinstance(v, _np.ndarray) else v for v in value]
        items = [dumps(v, indent + 1) for v in value]
        if _is_flat(value):
            return "[" + ", ".join(items) + "]"
        pad = "  " * (indent + 1)
        return "[\n" + ",\n".join(pad + item for item in items) + "\n" + "  " * indent + "]"
    return _format_scalar(value)


def graph_to_dict(graph, period, names=None, positions=None):
    """The net file contents, as a dictionary."""
    if names is None:
        names = [str(v) for v in range(graph.vertex_count)]
    if len(names) != graph.vertex_count:
        raise ValueError("Need {} vertex names, not {}".format(graph.vertex_count, len(names)))
    data = _collections.OrderedDict()
    data["dim"] = graph.dimension
    data["vertices"] = list(names)
    data["period"] = period.basis.tolist()
    data["edges"] = [_collections.OrderedDict([("from", names[e.tail]), ("to", names[e.head]),
        ("offset", list(e.offset)), ("weight", e.weight)]) for e in graph.edges]
    if positions is not None:
        positions = _np.asarray(positions, dtype=float)
        if positions.shape != (graph.vertex_count, graph.dimension):
            raise ValueError("Positions must have shape {}".format((graph.vertex_count, graph.dimension)))
        data["positions"] = positions.tolist()
    return data


def serialize(graph, period, out=None, names=None, positions=None):
    """Write a net file.

    :param out: Filename or file-like object; `None` to return the text.
    """
    text = dumps(graph_to_dict(graph, period, names, positions)) + "\n"
    if out is None:
        return text
    file, ours = open_file(out, "w")
    try:
        file.write(text)
    finally:
        if ours:
            file.close()


def _check_keys(data, allowed, required, where):
    if not isinstance(data, dict):
        raise ValueError("Expected an object for {}, not {}".format(where, data))
    unknown = set(data) - allowed
    if unknown:
        raise ValueError("Unexpected keys {} in {}".format(sorted(unknown), where))
    missing = required - set(data)
    if missing:
        raise ValueError("Missing keys {} in {}".format(sorted(missing), where))


def net_from_dict(data):
    """Validate and build a :class:`NetFile` from parsed JSON."""
    _check_keys(data, _NET_KEYS, _NET_KEYS - {"positions"}, "net")
    dimension = data["dim"]
    if not isinstance(dimension, int) or isinstance(dimension, bool):
        raise ValueError("Dimension must be an integer, not {}".format(dimension))
    names = data["vertices"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ValueError("Vertices must be a list of names")
    index = {}
    for k, name in enumerate(names):
        if name in index:
            raise ValueError("Duplicate vertex name '{}'".format(name))
        index[name] = k
    edges = []
    for edge in data["edges"]:
        _check_keys(edge, _EDGE_KEYS, _EDGE_KEYS, "edge")
        for end in ("from", "to"):
            if edge[end] not in index:
                raise ValueError("Edge refers to unknown vertex '{}'".format(edge[end]))
        offset = edge["offset"]
        if not isinstance(offset, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in offset):
            raise ValueError("Offset {} is not a list of integers".format(offset))
        weight = edge["weight"]
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise ValueError("Weight {} is not a number".format(weight))
        edges.append((index[edge["from"]], index[edge["to"]], tuple(offset), weight))
    graph = _net.build_graph(dimension, len(names), edges)
    period = _net.PeriodMap(data["period"])
    if period.dimension != dimension:
        raise ValueError("Period has dimension {} but file has {}".format(period.dimension, dimension))
    positions = None
    if "positions" in data:
        positions = _np.array(data["positions"], dtype=float)
        if positions.shape != (len(names), dimension):
            raise ValueError("Positions must have shape {}, not {}".format((len(names), dimension), positions.shape))
    return NetFile(graph, period, list(names), positions)


def parse(file):
    """Read a net file.

    :param file: A filename or file-like object.

    :return: :class:`NetFile`.
    """
    source, ours = open_file(file, "r")
    try:
        return net_from_dict(_json.load(source))
    except Exception as ex:
        raise NetFileError("Failed to parse {}, cause: {}/{}".format(file, type(ex), ex))
    finally:
        if ours:
            source.close()


def loads(text):
    """Parse a net file from a string."""
    try:
        return net_from_dict(_json.loads(text))
    except Exception as ex:
        raise NetFileError("Failed to parse net, cause: {}/{}".format(type(ex), ex))


def _graph_data(graph):
    return {"vertex_count": graph.vertex_count,
            "edges": [[e.tail, e.head, list(e.offset), e.weight] for e in graph.edges]}


def _schedule_data(schedule):
    params = schedule.params
    data = _collections.OrderedDict()
    data["mode"] = schedule.kind
    if schedule.kind == "fast":
        data["matrix"] = schedule.matrix.tolist()
    else:
        data["lambda"] = schedule.stretch
        data["rotation"] = None if schedule.rotation is None else schedule.rotation.tolist()
    data["delta"] = params.delta
    data["firmness"] = params.firmness.spec()
    data["p0"], data["p1"], data["p01"] = params.fractions
    data["max_moves"] = schedule.max_moves
    data["scan_step"] = schedule.scan_step
    data["bisect_tol"] = schedule.bisect_tol
    return data


def trace_to_dict(trace):
    """Everything needed to rebuild the trace, plus the summary values
    `R` and `epsilon0` (the latter `None` unless it is defined)."""
    data = _collections.OrderedDict()
    data["schedule"] = _schedule_data(trace.schedule)
    data["reference_period"] = trace.reference_period.basis.tolist()
    data["complete"] = trace.complete
    data["graphs"] = [_graph_data(g) for g in trace.graphs]
    data["events"] = [_collections.OrderedDict([("t", e.t), ("stretch", e.stretch), ("kind", e.kind),
        ("vertices", list(e.vertices)), ("offset", None if e.offset is None else list(e.offset)),
        ("margin", e.margin), ("graph", e.graph_id)]) for e in trace.events]
    data["segments"] = [_collections.OrderedDict([("start", s.start), ("end", s.end),
        ("tension", s.tension.tolist()), ("graph", s.graph_id)]) for s in trace.segments]
    if trace.final_realization is not None:
        data["final_positions"] = trace.final_realization.positions.tolist()
    if trace.segments:
        data["R"] = _deform.energy_loss_ratio(trace)
        strain = None
        rotation = trace.rotation
        if rotation is not None:
            try:
                strain = _mechanics.permanent_strain(trace.segments[-1].tension, rotation)
            except ValueError:
                strain = None
        data["epsilon0"] = strain
        data["e0_check"] = _deform.check_e0_vs_R(trace)
    return data


def trace_to_json(trace):
    return dumps(trace_to_dict(trace)) + "\n"


def _schedule_from_data(data):
    params = _moves.MoveParams(data["delta"], _moves.firmness_from_spec(data["firmness"]),
                               data["p0"], data["p1"], data["p01"])
    options = {"max_moves": data["max_moves"], "scan_step": data["scan_step"], "bisect_tol": data["bisect_tol"]}
    if data["mode"] == "fast":
        return _deform.Schedule.fast(data["matrix"], params, **options)
    if data["mode"] == "slow":
        return _deform.Schedule.slow(data["lambda"], params, data.get("rotation"), **options)
    raise ValueError("Unknown mode '{}'".format(data["mode"]))


def trace_from_dict(data):
    schedule = _schedule_from_data(data["schedule"])
    reference = _net.PeriodMap(data["reference_period"])
    N = reference.dimension
    graphs = [_net.build_graph(N, g["vertex_count"], g["edges"]) for g in data["graphs"]]
    events = [_deform.MoveEvent(e["t"], e["stretch"], e["kind"], tuple(e["vertices"]),
              None if e["offset"] is None else tuple(e["offset"]), e["margin"], e["graph"])
              for e in data["events"]]
    segments = [_deform.Segment(s["start"], s["end"], _np.array(s["tension"], dtype=float), s["graph"])
                for s in data["segments"]]
    final = None
    if "final_positions" in data:
        A = schedule.linear_map(1.0, N)
        final = _net.Realization(data["final_positions"], _net.PeriodMap(A @ reference.basis))
    return _deform.DeformationTrace(schedule, reference, graphs, events, segments, final, data["complete"])


def trace_from_json(text):
    """Rebuild a :class:`deform.DeformationTrace` from :func:`trace_to_json`
    output (a string, or a file-like object)."""
    try:
        if not isinstance(text, str):
            text = text.read()
        return trace_from_dict(_json.loads(text))
    except Exception as ex:
        raise NetFileError("Failed to parse trace, cause: {}/{}".format(type(ex), ex))
