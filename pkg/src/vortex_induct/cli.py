"""Command-line entry point: one subcommand per reproduced figure, CSV out."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from contextlib import contextmanager

import numpy as np

from . import circuit as circ
from . import complementarity as comp
from . import induction as ind
from .config import SimulationConfig, load_config
from .core_model import kinematics_from_energy
from .errors import ConfigError, ConvergenceError, OffsetTooLargeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_USAGE = 64

AUTOCORR_SPAN = 50.0        # trace half-width, transit times
AUTOCORR_SAMPLES = 20001
AUTOCORR_MAX_DELAY = 5.0    # transit times
OFFSET_POINTS = 11


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None,
                        help="JSON config (default: bundled fig2.json)")
    common.add_argument("--output", default=None, help="CSV path (default: stdout)")
    common.add_argument("--oam-list", type=_int_list, default=None,
                        help="comma-separated OAM values, e.g. 1,5,10")
    common.add_argument("--inductance-list", type=_float_list, default=None,
                        help="comma-separated inductances in pH")
    common.add_argument("--electron-z", type=float, default=0.0,
                        help="electron position for field-map, m")
    common.add_argument("--offset-max", type=float, default=None,
                        help="largest transverse offset for offset scan, m")
    common.add_argument("--human", action="store_true",
                        help="add pA / um / ps convenience columns")

    parser = _Parser(prog="vortex-induct",
                     description="Eddy currents induced by OAM-carrying electrons in a tube.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, help_ in [
        ("current", "induced tube current versus electron position"),
        ("energy-loss", "electron energy lost to the tube"),
        ("field-map", "magnetic energy density of the induced currents"),
        ("circuit", "RL-circuit response to the induced EMF"),
        ("autocorr", "two-loop autocorrelation trace"),
        ("offset", "peak current versus transverse beam offset"),
        ("visibility", "fringe visibility with which-path circuits"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(stream, header: list[str], rows) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _oams(args, cfg: SimulationConfig) -> list[int]:
    return args.oam_list if args.oam_list else [cfg.electron.oam]


def _suffix(values, unit: str = "") -> list[str]:
    return [f"_l{v}" if not unit else f"_{v:g}{unit}" for v in values]


def cmd_current(args, cfg: SimulationConfig):
    tube = cfg.tube_model()
    z = cfg.z_samples()
    oams = _oams(args, cfg)
    spec = cfg.quadrature_spec()
    cols = [ind.current_trace(cfg.electron_state(l), tube, z, spec).currents for l in oams]
    names = ["current_A"] if args.oam_list is None else [f"current_A{s}" for s in _suffix(oams)]
    header = ["z_m"] + names
    data = [z] + cols
    if args.human:
        header += ["z_um"] + [n.replace("current_A", "current_pA") for n in names]
        data += [z * 1e6] + [c * 1e12 for c in cols]
    return header, zip(*data)


def cmd_energy_loss(args, cfg: SimulationConfig):
    tube = cfg.tube_model()
    spec = cfg.quadrature_spec()
    rows = []
    for l in _oams(args, cfg):
        res = ind.energy_loss(cfg.electron_state(l), tube, spec)
        rows.append((l, res.delta_e_ev))
    return ["oam", "delta_e_ev"], rows


def _field_axes(cfg: SimulationConfig):
    fm = cfg.field_map
    a = cfg.tube.radius_m
    r_max = fm.r_max_m if fm.r_max_m is not None else 4.0 * a
    pad = fm.z_pad_m if fm.z_pad_m is not None else 4.0 * a
    half = 0.5 * cfg.tube.length_m
    return np.linspace(0.0, r_max, fm.n_r), np.linspace(-half - pad, half + pad, fm.n_z)


def cmd_field_map(args, cfg: SimulationConfig):
    r, z = _field_axes(cfg)
    oam = _oams(args, cfg)[0]
    grid = ind.field_energy_map(cfg.electron_state(oam), cfg.tube_model(), args.electron_z, r, z)
    rr, zz = np.meshgrid(grid.r_axis, grid.z_axis, indexing="ij")
    header = ["r_m", "z_m", "energy_density_j_per_m3"]
    data = [rr.ravel(), zz.ravel(), grid.energy_density.ravel()]
    if args.human:
        header += ["r_um", "z_um"]
        data += [rr.ravel() * 1e6, zz.ravel() * 1e6]
    return header, zip(*data)


def _circuit_for(cfg: SimulationConfig, inductance: float) -> circ.RlCircuit:
    return circ.RlCircuit.from_tube(cfg.tube_model(), inductance, cfg.circuit.resistance_ohm)


def cmd_circuit(args, cfg: SimulationConfig):
    tube = cfg.tube_model()
    electron = cfg.electron_state(_oams(args, cfg)[0])
    times = circ.default_times(electron, tube)
    emf = circ.emf_waveform(electron, tube, times, _circuit_for(cfg, 0.0))
    if args.inductance_list is None:
        inductances = [cfg.circuit.inductance_h]
        names = ["current_A"]
    else:
        inductances = [x * 1e-12 for x in args.inductance_list]
        names = [f"current_A{s}" for s in _suffix(args.inductance_list, "pH")]
    cols = [circ.rl_response(emf, _circuit_for(cfg, L)).values for L in inductances]
    header = ["t_s", "emf_v"] + names
    data = [times, emf.values] + cols
    if args.human:
        header += ["t_ps"] + [n.replace("current_A", "current_pA") for n in names]
        data += [times * 1e12] + [c * 1e12 for c in cols]
    return header, zip(*data)


def autocorrelation_table(cfg: SimulationConfig, oams: list[int]):
    """Delays and C_l(tau) / C_1(0) for each l, on the lattice of the current trace."""
    tube = cfg.tube_model()
    base = cfg.electron_state(1)
    times = circ.default_times(base, tube, n=AUTOCORR_SAMPLES, span=AUTOCORR_SPAN)
    dt = times[1] - times[0]
    k_max = int(round(AUTOCORR_MAX_DELAY * circ.transit_time(base, tube) / dt))
    stride = max(1, k_max // 200)
    k_max -= k_max % stride
    lattice = np.arange(-k_max, k_max + 1, stride)
    delays = dt * lattice
    zero = int(np.nonzero(lattice == 0)[0][0])

    def trace(l):
        el = cfg.electron_state(l)
        z = kinematics_from_energy(el).speed * times
        return circ.TimeTrace(times, ind.current_at(z, el, tube))

    c1 = circ.autocorrelation(trace(1), delays).values[zero]
    cols = [circ.autocorrelation(trace(l), delays).values / c1 for l in oams]
    return delays, cols


def cmd_autocorr(args, cfg: SimulationConfig):
    oams = _oams(args, cfg)
    delays, cols = autocorrelation_table(cfg, oams)
    names = ["c_norm"] if args.oam_list is None else [f"c_norm{s}" for s in _suffix(oams)]
    header = ["tau_s"] + names
    data = [delays] + cols
    if args.human:
        header += ["tau_ps"]
        data += [delays * 1e12]
    return header, zip(*data)


def cmd_offset(args, cfg: SimulationConfig):
    tube = cfg.tube_model()
    d_max = args.offset_max if args.offset_max is not None else 0.5 * tube.radius
    offsets = np.linspace(0.0, d_max, OFFSET_POINTS)
    oams = _oams(args, cfg)
    res = ind.offset_scan(cfg.electron_state(), tube, offsets, oams)
    ratios = res.ratios
    rows = []
    for j, d in enumerate(res.offsets):
        for i, l in enumerate(res.oam_values):
            row = [d, int(l), res.peak_currents[i, j], ratios[i, j]]
            if args.human:
                row += [d * 1e6, res.peak_currents[i, j] * 1e12]
            rows.append(row)
    header = ["offset_m", "oam", "peak_current_A", "ratio_to_l1"]
    if args.human:
        header += ["offset_um", "peak_current_pA"]
    return header, rows


def cmd_visibility(args, cfg: SimulationConfig):
    cc = cfg.complementarity
    path = comp.PathState(relative_phase=cc.relative_phase)
    rows = []
    for lam in cc.coupling_values:
        state = comp.coherent_circuit_state(lam, cc.hilbert_dim)
        alpha = comp.alpha_coefficient(state, state)
        rho = comp.reduced_density(path, state, state)
        rows.append((alpha.real, alpha.imag, comp.visibility(rho), rho.purity))
    return ["alpha_re", "alpha_im", "visibility", "purity"], rows


COMMANDS = {
    "current": cmd_current,
    "energy-loss": cmd_energy_loss,
    "field-map": cmd_field_map,
    "circuit": cmd_circuit,
    "autocorr": cmd_autocorr,
    "offset": cmd_offset,
    "visibility": cmd_visibility,
}


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        header, rows = COMMANDS[args.command](args, cfg)
        buf = io.StringIO()
        write_csv(buf, header, rows)
    except (ConfigError, OffsetTooLargeError) as exc:
        print(f"vortex-induct: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"vortex-induct: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"vortex-induct: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    with _sink(args.output) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
