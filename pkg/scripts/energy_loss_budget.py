"""Energy lost by the electron, three ways, at the bundled tube parameters.

1. nested quadrature with the finite current loop (the library routine)
2. closed form in the point-dipole limit
3. I^2 R dissipation of the lumped single-loop circuit

Prints one row per OAM value so the estimates can be compared side by side.
"""
import argparse
import math

import numpy as np

from vortex_induct import circuit as circ
from vortex_induct import induction as ind
from vortex_induct.config import load_config
from vortex_induct.core_model import CODATA2018, kinematics_from_energy, loop_model


def dipole_closed_form(electron, tube):
    kin = kinematics_from_energy(electron)
    m = loop_model(electron).dipole_moment
    a = tube.radius
    # L * int (d/ds A_dip(a, gamma s))^2 ds; the s-integral is B(3/2, 7/2) / (gamma a^7)
    coeff = (3 * CODATA2018.mu0 * m * a / (4 * math.pi)) ** 2 * kin.gamma * (5 * math.pi / 128) / a**7
    return (2 * math.pi * tube.conductivity * a * tube.thickness * kin.velocity_factor
            * tube.length * coeff / CODATA2018.e)


def lumped(electron, tube):
    times = circ.default_times(electron, tube)
    c = circ.RlCircuit.from_tube(tube)
    i = circ.rl_response(circ.emf_waveform(electron, tube, times), c).values
    return np.trapezoid(i * i, times) * c.resistance / CODATA2018.e


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None)
    ap.add_argument("--oam", default="1,10,100")
    args = ap.parse_args()
    cfg = load_config(args.config)
    tube = cfg.tube_model()
    print(f"{'oam':>5} {'quadrature_eV':>14} {'dipole_eV':>14} {'lumped_I2R_eV':>14}")
    for ell in (int(x) for x in args.oam.split(",")):
        el = cfg.electron_state(ell)
        quad = ind.energy_loss(el, tube, cfg.quadrature_spec()).magnitude_ev
        print(f"{ell:5d} {quad:14.4e} {dipole_closed_form(el, tube):14.4e} {lumped(el, tube):14.4e}")


if __name__ == "__main__":
    main()
