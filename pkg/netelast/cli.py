"""
cli
~~~

Command line front end.  Run as `python -m netelast.cli COMMAND ...`:

- `lattice NAME`: write a preset net file
- `harmonic FILE`, `standardize FILE`: positions, energy and tension as JSON
  (`standardize --as-net` writes the standard net as a net file instead)
- `tension FILE`: tension, stress and standardness as JSON
- `deform FILE`: standardize, deform, and write the trace as JSON
- `curve TRACE`: CSV of `strain,sigma_eng,sigma_true,energy`
- `analyze zw|limit-ratio|blend`: the weight analytics
- `render FILE`: SVG drawing of a two dimensional net

A filename of "-" means standard input.  Exit codes: 1 for invalid input,
2 for numerical failure, 3 when the move cap is exceeded.
"""

import argparse
import json as _json
import logging
import math as _math
import sys
import numpy as _np

from . import analysis as _analysis
from . import config as _config
from . import deform as _deform
from . import mechanics as _mechanics
from . import net as _net
from . import netfile as _netfile
from . import render as _render
from . import solver as _solver

_logger = logging.getLogger(__name__)

EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_MOVE_CAP = 3


def _read_text(name, stdin):
    if name == "-":
        return stdin.read()
    return None


def _load_net(name, stdin):
    text = _read_text(name, stdin)
    if text is not None:
        return _netfile.loads(text)
    return _netfile.parse(name)


def _load_trace(name, stdin):
    text = _read_text(name, stdin)
    if text is None:
        with open(name, encoding="utf-8") as f:
            text = f.read()
    return _netfile.trace_from_json(text)


def _require_connected(graph):
    if not _net.is_positively_connected(graph):
        raise ValueError("Positive-weight edges do not connect the {} vertex orbits".format(graph.vertex_count))


def _realization_report(graph, realization):
    tension = _solver.global_tension(graph, realization)
    data = {"positions": realization.positions.tolist(),
            "period": realization.period.basis.tolist(),
            "energy": _solver.energy(graph, realization),
            "tension": tension.tolist(),
            "covolume": realization.period.covolume}
    return data


def _preset_params(args):
    params = {}
    for key in ("l", "w0", "w1", "a", "m", "N"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.weights is not None:
        params["weights"] = {tuple(_json.loads(k)): w for k, w in _json.loads(args.weights).items()}
    return params


def cmd_lattice(args, stdin):
    graph, period = _net.lattice_preset(args.name, **_preset_params(args))
    return _netfile.serialize(graph, period)


def cmd_harmonic(args, stdin):
    net = _load_net(args.file, stdin)
    _require_connected(net.graph)
    realization = _solver.harmonic_realize(net.graph, net.period)
    return _netfile.dumps(_realization_report(net.graph, realization)) + "\n"


def cmd_standardize(args, stdin):
    net = _load_net(args.file, stdin)
    _require_connected(net.graph)
    realization, A = _solver.standardize(net.graph, net.period)
    if args.as_net:
        return _netfile.serialize(net.graph, realization.period, names=net.names, positions=realization.positions)
    data = _realization_report(net.graph, realization)
    data["matrix"] = A.tolist()
    return _netfile.dumps(data) + "\n"


def cmd_tension(args, stdin):
    net = _load_net(args.file, stdin)
    _require_connected(net.graph)
    realization = _solver.harmonic_realize(net.graph, net.period)
    tension = _solver.global_tension(net.graph, realization)
    stress = _mechanics.cauchy_stress(tension, net.period.covolume)
    data = {"tension": tension.tolist(),
            "per_weight": _solver.per_weight_tension(net.graph, realization).tolist(),
            "cauchy": stress.cauchy.tolist(),
            "deviatoric": stress.deviatoric.tolist(),
            "energy": _solver.energy(net.graph, realization),
            "covolume": net.period.covolume,
            "standard": bool(_solver.is_standard(tension))}
    return _netfile.dumps(data) + "\n"


def _run_config(args):
    base = None
    if args.config is not None:
        base = _config.RunConfig.from_file(args.config).to_dict()
    return _config.RunConfig.from_args(args, base)


def cmd_deform(args, stdin):
    net = _load_net(args.file, stdin)
    _require_connected(net.graph)
    run = _run_config(args)
    realization, _ = _solver.standardize(net.graph, net.period)
    schedule = run.schedule()
    try:
        if schedule.kind == "fast":
            trace = _deform.fast_deform(net.graph, realization, schedule.matrix, schedule.params,
                                        max_moves=schedule.max_moves)
        else:
            trace = _deform.slow_deform(net.graph, realization, schedule)
    except _deform.MoveCapExceeded as ex:
        ex.output = _netfile.trace_to_json(ex.trace)
        raise
    return _netfile.trace_to_json(trace)


def cmd_curve(args, stdin):
    trace = _load_trace(args.trace, stdin)
    if trace.schedule.kind != "slow":
        raise ValueError("A stress-strain curve needs a slow deformation trace")
    top = args.lambda_max if args.lambda_max is not None else trace.schedule.stretch
    if args.samples < 2:
        raise ValueError("Need at least two samples, not {}".format(args.samples))
    samples = _np.linspace(1.0, top, args.samples)
    points = _deform.stress_strain_curve(trace, None, samples)
    lines = ["strain,sigma_eng,sigma_true,energy"]
    for p in points:
        lines.append(",".join("{:.17g}".format(float(x)) for x in p))
    return "\n".join(lines) + "\n"


def cmd_analyze_zw(args, stdin):
    net = _load_net(args.file, stdin)
    fit = _analysis.extract_zW(net.graph, net.period, (args.v0, args.v1), tuple(args.probes))
    data = {"z": fit.z.tolist(), "W": fit.W, "residual": fit.residual,
            "bound": _analysis.auxiliary_weight(net.graph, args.v0, args.v1)}
    if args.weight is not None:
        report = _analysis.verify_loss_identity(net.graph, net.period, fit, args.weight)
        data["tensor_deviation"] = report.tensor_deviation
        data["energy_deviation"] = report.energy_deviation
        data["identity_ok"] = bool(report.ok)
    return _netfile.dumps(data) + "\n"


def cmd_analyze_limit(args, stdin):
    F = _analysis.WeightFunction.gaussian(args.sigma)
    u = args.u if args.u is not None else [1.0] + [_math.sqrt(2)] * (args.N - 1)
    if len(u) != args.N:
        raise ValueError("Half-space normal must have {} entries".format(args.N))
    results = _analysis.limit_ratio(F, u, args.p, args.s, radius=args.radius)
    data = {"limit": _analysis.gaussian_limit_ratio(args.N),
            "ratios": [[s, r] for s, r in results]}
    return _netfile.dumps(data) + "\n"


def cmd_analyze_blend(args, stdin):
    if args.w0 is not None or args.w1 is not None:
        if args.w0 is None or args.w1 is None:
            raise ValueError("Give both --w0 and --w1 weight tables")
        w0 = {tuple(_json.loads(k)): w for k, w in _json.loads(args.w0).items()}
        w1 = {tuple(_json.loads(k)): w for k, w in _json.loads(args.w1).items()}
    else:
        w0, w1 = _analysis.cube_lattice_tables(args.N, args.a, args.m)
    grid = _np.linspace(0.0, 1.0, args.cells + 1)
    result = _analysis.blend_analysis(w0, w1, args.p, grid)
    data = {"s_hat": result.s_hat, "r_hat": result.r_hat, "r0": result.r0, "r1": result.r1,
            "verified": result.verified, "curve": [[s, r] for s, r in result.curve]}
    return _netfile.dumps(data) + "\n"


def cmd_render(args, stdin):
    if args.trace:
        return _render.render_svg(trace=_load_trace(args.file, stdin))
    net = _load_net(args.file, stdin)
    _require_connected(net.graph)
    if net.positions is not None:
        realization = _net.Realization(net.positions, net.period)
    else:
        realization = _solver.harmonic_realize(net.graph, net.period)
    return _render.render_svg(net.graph, realization)


def _add_run_flags(parser):
    parser.add_argument("--config", help="JSON file of run settings; flags override it")
    parser.add_argument("--mode", choices=["fast", "slow"])
    parser.add_argument("--lambda", dest="stretch", type=float, help="Target stretch (slow)")
    parser.add_argument("--theta", type=float, help="Angle of extension in radians (2D)")
    parser.add_argument("--matrix", help="JSON list of rows (fast)")
    parser.add_argument("--delta", type=float, help="Contraction threshold")
    parser.add_argument("--K", type=float, help="Constant firmness")
    parser.add_argument("--kappa", type=float, help="Firmness proportional to degree")
    parser.add_argument("--firmness", help="Firmness as JSON")
    parser.add_argument("--p0", type=float)
    parser.add_argument("--p1", type=float)
    parser.add_argument("--p01", type=float)
    parser.add_argument("--scan-step", dest="scan_step", type=float)
    parser.add_argument("--bisect-tol", dest="bisect_tol", type=float)
    parser.add_argument("--max-moves", dest="max_moves", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="netelast", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--out", help="Write output here instead of standard output")
    commands = parser.add_subparsers(dest="command")
    commands.required = True

    lattice = commands.add_parser("lattice", help="Write a preset net")
    lattice.add_argument("name", help="hexagonal, square, cubic or single_vertex")
    for key in ("l", "w0", "w1", "a"):
        lattice.add_argument("--" + key, type=float)
    lattice.add_argument("--m", type=int)
    lattice.add_argument("--N", type=int)
    lattice.add_argument("--weights", help='JSON object such as {"[1,0]": 1, "[0,0]": 2}')
    lattice.set_defaults(handler=cmd_lattice)

    for name, handler, help in (("harmonic", cmd_harmonic, "Harmonic realization"),
                                ("standardize", cmd_standardize, "Standard realization"),
                                ("tension", cmd_tension, "Tension and stress")):
        sub = commands.add_parser(name, help=help)
        sub.add_argument("file", nargs="?", default="-")
        sub.set_defaults(handler=handler)
        if name == "standardize":
            sub.add_argument("--as-net", dest="as_net", action="store_true")

    deform = commands.add_parser("deform", help="Deform a net and write the trace")
    deform.add_argument("file", nargs="?", default="-")
    _add_run_flags(deform)
    deform.set_defaults(handler=cmd_deform)

    curve = commands.add_parser("curve", help="Stress-strain CSV from a trace")
    curve.add_argument("trace", nargs="?", default="-")
    curve.add_argument("--samples", type=int, default=101)
    curve.add_argument("--lambda-max", dest="lambda_max", type=float)
    curve.set_defaults(handler=cmd_curve)

    analyze = commands.add_parser("analyze", help="Weight analytics")
    kinds = analyze.add_subparsers(dest="analysis")
    kinds.required = True
    zw = kinds.add_parser("zw", help="Fit z and W for an edge")
    zw.add_argument("file", nargs="?", default="-")
    zw.add_argument("--v0", type=int, required=True)
    zw.add_argument("--v1", type=int, required=True)
    zw.add_argument("--probes", type=float, nargs=3, default=[0.5, 2.0, 8.0])
    zw.add_argument("--weight", type=float, help="Also check the contraction identity at this weight")
    zw.set_defaults(handler=cmd_analyze_zw)
    limit = kinds.add_parser("limit-ratio", help="Gaussian weight loss ratios")
    limit.add_argument("--sigma", type=float, default=1.0)
    limit.add_argument("--N", type=int, default=2)
    limit.add_argument("--p", type=float, default=0.5)
    limit.add_argument("--s", type=float, nargs="+", default=[1.0])
    limit.add_argument("--u", type=float, nargs="+")
    limit.add_argument("--radius", type=float)
    limit.set_defaults(handler=cmd_analyze_limit)
    blend = kinds.add_parser("blend", help="Blend two weight systems")
    blend.add_argument("--N", type=int, default=2)
    blend.add_argument("--a", type=float, default=1.0)
    blend.add_argument("--m", type=int, default=2)
    blend.add_argument("--p", type=float, default=0.5)
    blend.add_argument("--cells", type=int, default=100)
    blend.add_argument("--w0", help="JSON weight table")
    blend.add_argument("--w1", help="JSON weight table")
    blend.set_defaults(handler=cmd_analyze_blend)

    render = commands.add_parser("render", help="SVG drawing of a 2D net")
    render.add_argument("file", nargs="?", default="-")
    render.add_argument("--trace", action="store_true", help="The input is a trace")
    render.set_defaults(handler=cmd_render)
    return parser


def _configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _write(out, text, stdout):
    if out is None:
        stdout.write(text)
        return
    file, ours = _netfile.open_file(out, "w")
    try:
        file.write(text)
    finally:
        if ours:
            file.close()


def main(argv=None, stdin=None, stdout=None):
    """Run the command line.

    :return: The exit code.
    """
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as ex:
        # argparse exits 2 on usage errors; that code means a numerical failure here
        return EXIT_INVALID if ex.code else 0
    _configure_logging(args.verbose)
    try:
        text = args.handler(args, stdin)
    except _deform.MoveCapExceeded as ex:
        _logger.error("%s", ex)
        partial = getattr(ex, "output", None)
        if partial is not None:
            _write(args.out, partial, stdout)
        return EXIT_MOVE_CAP
    except (_solver.SingularSystemError, _deform.NonGenericStall, _analysis.ConvergenceError) as ex:
        _logger.error("%s", ex)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError) as ex:
        _logger.error("%s", ex)
        return EXIT_INVALID
    _write(args.out, text, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
