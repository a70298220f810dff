"""
deform
~~~~~~

Deforming a standard net, and the plasticity read off from the record.

- *Fast* deformation applies the linear map `A` at once, then exhausts local
  moves at that fixed period: splittings first, then contractions, and again
  until nothing qualifies.
- *Slow* deformation follows the uniaxial family `A_t = A(lambda^t)`,
  `0 <= t <= 1`.  We scan `t` in steps, bisect to the first `t` at which some
  move qualifies, apply that single move, exhaust the consequences at fixed
  `t`, and carry on.

Between events the graph is fixed, so the harmonic realization at `A_t rho_0`
is `A_t` applied to the harmonic realization at `rho_0`.  Hence each segment
is described exactly by its "pulled back" tension: the global tension of the
harmonic realization at the reference period.  A :class:`DeformationTrace`
records the graphs, the move events and these segments.

For progress reporting, :func:`slow_deform_gen` is a generator yielding the
(partial) trace after each event; :func:`slow_deform` simply consumes it.
Alternatively pass a :class:`DeformationHandler`.
"""

import collections as _collections
import logging
import numpy as _np

from . import mechanics as _mechanics
from . import moves as _moves
from . import net as _net
from . import solver as _solver
from .utils import pool as _pool

_logger = logging.getLogger(__name__)

MoveEvent = _collections.namedtuple("MoveEvent", ["t", "stretch", "kind", "vertices", "offset", "margin", "graph_id"])

Segment = _collections.namedtuple("Segment", ["start", "end", "tension", "graph_id"])

CurvePoint = _collections.namedtuple("CurvePoint", ["strain", "sigma_eng", "sigma_true", "energy"])

SPLITTING = "splitting"
CONTRACTION = "contraction"


class NonGenericStall(Exception):
    """Only non-generic splittings remain, and nothing will perturb them."""
    def __init__(self, vertex, trace=None):
        super().__init__("Vertex {} qualifies to split but is not generic".format(vertex))
        self.vertex = vertex
        self.trace = trace


class MoveCapExceeded(Exception):
    """More local moves than allowed; `trace` holds the run so far."""
    def __init__(self, cap, trace):
        super().__init__("Exceeded the cap of {} local moves".format(cap))
        self.cap = cap
        self.trace = trace


class DeformationHandler():
    """Interface for callbacks from the engines.  Override what you need."""
    def started(self, trace):
        pass

    def event(self, trace, event):
        pass

    def segment(self, trace, segment):
        pass

    def finished(self, trace):
        pass


class Schedule():
    """How to deform.  Construct with :meth:`fast` or :meth:`slow`.

    :param max_moves: Cap on the number of local moves; `None` means ten
      times the number of vertex orbits of the initial graph.
    :param scan_step: Step in `t` when scanning for events.
    :param bisect_tol: Width in `t` to which events are bisected.
    """
    def __init__(self, params, matrix=None, stretch=None, rotation=None, max_moves=None,
                 scan_step=1e-3, bisect_tol=1e-10):
        if (matrix is None) == (stretch is None):
            raise ValueError("Specify exactly one of a matrix (fast) or a stretch (slow)")
        if not isinstance(params, _moves.MoveParams):
            raise ValueError("Expected MoveParams, not {}".format(params))
        self._params = params
        self._matrix = None
        self._stretch = None
        self._rotation = None
        if matrix is not None:
            matrix = _np.array(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ValueError("Deformation must be a square matrix, not shape {}".format(matrix.shape))
            if abs(_np.linalg.det(matrix) - 1.0) > 1e-9:
                raise ValueError("Deformation must have determinant one, not {}".format(_np.linalg.det(matrix)))
            self._matrix = matrix
        else:
            if not stretch > 0:
                raise ValueError("Target stretch must be positive, not {}".format(stretch))
            self._stretch = float(stretch)
            if rotation is not None:
                rotation = _np.array(rotation, dtype=float)
                _mechanics.check_rotation(rotation, rotation.shape[0])
            self._rotation = rotation
        if max_moves is not None and not max_moves >= 1:
            raise ValueError("Move cap must be positive, not {}".format(max_moves))
        if not 0 < scan_step <= 1:
            raise ValueError("Scan step must lie in (0,1], not {}".format(scan_step))
        if not 0 < bisect_tol < scan_step:
            raise ValueError("Bisection tolerance must lie in (0, scan step), not {}".format(bisect_tol))
        self._max_moves = max_moves
        self._scan_step = float(scan_step)
        self._bisect_tol = float(bisect_tol)

    @classmethod
    def fast(cls, matrix, params, **kwargs):
        return cls(params, matrix=matrix, **kwargs)

    @classmethod
    def slow(cls, stretch, params, rotation=None, **kwargs):
        return cls(params, stretch=stretch, rotation=rotation, **kwargs)

    @property
    def kind(self):
        """Either "fast" or "slow"."""
        return "fast" if self._matrix is not None else "slow"

    @property
    def params(self):
        return self._params

    @property
    def matrix(self):
        return self._matrix

    @property
    def stretch(self):
        """Target stretch `lambda` of a slow schedule."""
        return self._stretch

    @property
    def rotation(self):
        """Frame of the uniaxial extension, or `None` for the identity."""
        return self._rotation

    @property
    def max_moves(self):
        return self._max_moves

    @property
    def scan_step(self):
        return self._scan_step

    @property
    def bisect_tol(self):
        return self._bisect_tol

    def stretch_at(self, t):
        return self._stretch ** t

    def linear_map(self, t, dimension):
        """The deformation `A_t` (fast schedules ignore `t`)."""
        if self._matrix is not None:
            if self._matrix.shape[0] != dimension:
                raise ValueError("Deformation has dimension {} but net has {}".format(self._matrix.shape[0], dimension))
            return self._matrix
        return _mechanics.uniaxial_map(self.stretch_at(t), dimension, self._rotation)

    def __repr__(self):
        if self.kind == "fast":
            return "Schedule(fast, A={}, {})".format(self._matrix.tolist(), self._params)
        return "Schedule(slow, lambda={}, {})".format(self._stretch, self._params)


class DeformationTrace():
    """Record of a deformation: the sequence of graphs (index 0 is the
    initial graph), move events and segments.  For slow runs a segment covers
    an interval of stretch; fast runs have `start` and `end` of `None`."""
    def __init__(self, schedule, reference_period, graphs=None, events=None, segments=None,
                 final_realization=None, complete=False):
        self._schedule = schedule
        self._reference = reference_period
        self._graphs = list(graphs) if graphs is not None else []
        self._events = list(events) if events is not None else []
        self._segments = list(segments) if segments is not None else []
        self._final_realization = final_realization
        self._complete = complete

    @property
    def schedule(self):
        return self._schedule

    @property
    def reference_period(self):
        """The period `rho_0` of the undeformed net."""
        return self._reference

    @property
    def dimension(self):
        return self._reference.dimension

    @property
    def covolume(self):
        return self._reference.covolume

    @property
    def rotation(self):
        """Extension frame of a slow run (identity if unspecified); `None` for
        a fast run."""
        if self._schedule.kind == "fast":
            return None
        return _mechanics.check_rotation(self._schedule.rotation, self.dimension)

    @property
    def graphs(self):
        return self._graphs

    @property
    def events(self):
        return self._events

    @property
    def segments(self):
        return self._segments

    @property
    def final_graph(self):
        return self._graphs[-1]

    @property
    def final_realization(self):
        """Harmonic realization of the final graph at the final period."""
        return self._final_realization

    @property
    def complete(self):
        return self._complete

    def __repr__(self):
        return "DeformationTrace(events={}, segments={}, complete={})".format(len(self._events),
            len(self._segments), self._complete)


class _Engine():
    def __init__(self, graph, realization, schedule, handler):
        self._schedule = schedule
        self._params = schedule.params
        self._graph = graph
        self._handler = handler if handler is not None else DeformationHandler()
        reference = realization.period
        tension = _solver.global_tension(graph, _solver.harmonic_realize(graph, reference))
        if not _solver.is_standard(tension):
            raise ValueError("Initial net is not standard; tension {}".format(tension.tolist()))
        self._cap = schedule.max_moves
        if self._cap is None:
            self._cap = 10 * graph.vertex_count
        self._trace = DeformationTrace(schedule, reference, graphs=[graph])
        self._segment_start = None
        self._segment_tension = tension
        self._segment_graph = 0
        self._moves = 0

    @property
    def trace(self):
        return self._trace

    def _period(self, t):
        A = self._schedule.linear_map(t, self._graph.dimension)
        return _net.PeriodMap(A @ self._trace.reference_period.basis)

    def _stretch(self, t):
        if self._schedule.kind == "fast":
            return None
        return self._schedule.stretch_at(t)

    def _solve(self, t):
        return _solver.harmonic_realize(self._graph, self._period(t))

    def _splittings(self, realization):
        return _moves.find_splittings(self._graph, realization, self._params.firmness)

    def _contractions(self, realization):
        return _moves.find_contractions(self._graph, realization, self._params.delta)

    def _triggered(self, t):
        realization = self._solve(t)
        if self._contractions(realization):
            return True
        return any(c.generic for c in self._splittings(realization))

    def _apply(self, t, kind, candidate, realization):
        if self._moves >= self._cap:
            raise MoveCapExceeded(self._cap, self._trace)
        if kind == SPLITTING:
            self._graph, _ = _moves.apply_splitting(self._graph, realization, candidate, self._params)
            vertices, offset, margin = (candidate.vertex,), None, candidate.margin
        else:
            self._graph = _moves.apply_contraction(self._graph, candidate)
            vertices, offset = (candidate.v0, candidate.v1), candidate.offset
            margin = self._params.delta - candidate.distance
        self._moves += 1
        self._trace._graphs.append(self._graph)
        event = MoveEvent(t, self._stretch(t), kind, vertices, offset, margin, len(self._trace._graphs) - 1)
        self._trace._events.append(event)
        _logger.info("%s of %s at t=%s lambda=%s (margin %s)", kind, vertices, t, event.stretch, margin)
        self._handler.event(self._trace, event)

    def _exhaust(self, t):
        """Apply splittings, then contractions, until quiescent at fixed `t`.
        Returns the non-generic splitting candidates which remain."""
        while True:
            applied = False
            while True:
                realization = self._solve(t)
                generic = [c for c in self._splittings(realization) if c.generic]
                if not generic:
                    break
                self._apply(t, SPLITTING, generic[0], realization)
                applied = True
            while True:
                realization = self._solve(t)
                contractions = self._contractions(realization)
                if not contractions:
                    break
                self._apply(t, CONTRACTION, contractions[0], realization)
                applied = True
            if not applied:
                break
        return [c for c in self._splittings(self._solve(t)) if not c.generic]

    def _best_move(self, t):
        realization = self._solve(t)
        options = []
        for c in self._splittings(realization):
            if c.generic:
                options.append((-c.margin, (c.vertex,), SPLITTING, c))
        for c in self._contractions(realization):
            options.append((c.distance - self._params.delta, (c.v0, c.v1), CONTRACTION, c))
        options.sort(key=lambda x: (x[0], x[1]))
        _, _, kind, candidate = options[0]
        return kind, candidate, realization

    def _pulled_back_tension(self):
        realization = _solver.harmonic_realize(self._graph, self._trace.reference_period)
        return _solver.global_tension(self._graph, realization)

    def _close_segment(self, end):
        segment = Segment(self._segment_start, end, self._segment_tension, self._segment_graph)
        self._trace._segments.append(segment)
        self._handler.segment(self._trace, segment)

    def _moves_at(self, t, first=None):
        """Run the moves at an event time; if any happened, start a new
        segment.  Returns the blocked (non-generic) splittings."""
        before = len(self._trace._graphs)
        if first is not None:
            kind, candidate, realization = first
            self._apply(t, kind, candidate, realization)
        blocked = self._exhaust(t)
        if len(self._trace._graphs) > before:
            self._close_segment(self._stretch(t))
            self._segment_start = self._stretch(t)
            self._segment_tension = self._pulled_back_tension()
            self._segment_graph = len(self._trace._graphs) - 1
        return blocked

    def _finish(self, t, blocked):
        if blocked:
            raise NonGenericStall(blocked[0].vertex, self._trace)
        self._close_segment(self._stretch(t))
        self._trace._final_realization = self._solve(t)
        self._trace._complete = True
        self._handler.finished(self._trace)

    def run_fast(self):
        self._handler.started(self._trace)
        blocked = self._moves_at(1.0)
        self._finish(1.0, blocked)
        return self._trace

    def run_slow(self):
        self._handler.started(self._trace)
        step, tolerance = self._schedule.scan_step, self._schedule.bisect_tol
        self._segment_start = 1.0
        self._moves_at(0.0)
        if self._trace.events:
            yield self._trace
        t = 0.0
        while t < 1.0:
            t_next = min(1.0, t + step)
            if not self._triggered(t_next):
                t = t_next
                continue
            low, high = t, t_next
            while high - low > tolerance:
                middle = (low + high) / 2
                if self._triggered(middle):
                    high = middle
                else:
                    low = middle
            _logger.debug("Event bracketed in t=[%s, %s]", low, high)
            self._moves_at(high, self._best_move(high))
            yield self._trace
            t = high
        blocked = [c for c in self._splittings(self._solve(1.0)) if not c.generic]
        self._finish(1.0, blocked)
        yield self._trace


def fast_deform(graph, realization, matrix, params, max_moves=None, handler=None):
    """Apply `matrix` (determinant one) to the standard net, then exhaust the
    local moves.

    :param graph: The :class:`net.QuotientGraph`.
    :param realization: A standard realization; its period is the reference.
    :param matrix: The deformation `A`.
    :param params: :class:`moves.MoveParams`.

    :return: A complete :class:`DeformationTrace`.
    """
    schedule = Schedule.fast(matrix, params, max_moves=max_moves)
    return _Engine(graph, realization, schedule, handler).run_fast()


def slow_deform_gen(graph, realization, schedule, handler=None):
    """Run a slow deformation, yielding the trace (in progress) after each
    event, and finally the complete trace."""
    if schedule.kind != "slow":
        raise ValueError("Slow deformation needs a slow schedule, not {}".format(schedule))
    engine = _Engine(graph, realization, schedule, handler)
    yield from engine.run_slow()


def slow_deform(graph, realization, schedule, handler=None):
    """Run a slow deformation to completion.

    :return: A complete :class:`DeformationTrace`.
    """
    trace = None
    for trace in slow_deform_gen(graph, realization, schedule, handler):
        pass
    return trace


def energy_loss_ratio(trace, segment=-1):
    """`(E_0 - E_m) / E_0` where `E_m` is the pulled back energy of the given
    segment (default: the last)."""
    initial = float(_np.trace(trace.segments[0].tension))
    if not initial > 0:
        raise ValueError("Initial energy is zero")
    return (initial - float(_np.trace(trace.segments[segment].tension))) / initial


def segment_for(trace, stretch):
    """The segment in force at `stretch`.

    Event stretches increase along a stretching run and decrease along a
    compressing one; either way the segment that starts at an event is in
    force there.
    """
    target = trace.schedule.stretch
    descending = target is not None and target < 1.0
    chosen = trace.segments[0]
    for segment in trace.segments:
        if segment.start is None:
            continue
        if (segment.start >= stretch) if descending else (segment.start <= stretch):
            chosen = segment
    return chosen


def stress_strain_curve(trace, V, samples, workers=None):
    """Evaluate strain, engineering and true stress, and energy at each
    sample stretch, from the closed form of the segment in force.

    :param V: Covolume; `None` means that of the reference period.
    :param samples: Iterable of stretches.
    :param workers: Thread count; `None` reads `NETELAST_THREADS`.

    :return: List of :class:`CurvePoint`.
    """
    rotation = trace.rotation
    if rotation is None:
        raise ValueError("A stress-strain curve needs a slow (uniaxial) deformation")
    if V is None:
        V = trace.covolume
    def evaluate(stretch):
        tension = segment_for(trace, stretch).tension
        energy, derivative = _mechanics.energy_profile(tension, stretch, rotation)
        sigma = derivative / V
        return CurvePoint(stretch - 1.0, sigma, stretch * sigma, energy)
    return _pool.ordered_map(evaluate, samples, workers)


def e0_bracket(R, N):
    """Bounds on the permanent strain after splittings only, for
    `R < 1/N`.

    :return: Pair `(lower, upper)`.
    """
    if N < 2:
        raise ValueError("Need dimension at least 2, not {}".format(N))
    if not R < 1.0 / N:
        raise ValueError("Energy loss ratio {} is not below 1/{}".format(R, N))
    exponent = (N - 1) / (2.0 * N)
    lower = (1 - N * R / (N - 1)) ** exponent - 1
    upper = (1 - N * R) ** (-exponent) - 1
    return lower, upper


def check_e0_vs_R(trace, slack=1e-9):
    """Does the permanent strain lie within :func:`e0_bracket`?

    :return: `True` or `False`, or `None` if the bound does not apply: the run
      is fast, contains a contraction, did not start standard, or has
      `R >= 1/N`.
    """
    rotation = trace.rotation
    N = trace.dimension
    if rotation is None or N < 2 or not trace.segments:
        return None
    if any(e.kind != SPLITTING for e in trace.events):
        return None
    if not _solver.is_standard(trace.segments[0].tension, 1e-9):
        return None
    R = energy_loss_ratio(trace)
    if not R < 1.0 / N:
        return None
    lower, upper = e0_bracket(R, N)
    strain = _mechanics.permanent_strain(trace.segments[-1].tension, rotation)
    return bool(lower - slack <= strain <= upper + slack)
