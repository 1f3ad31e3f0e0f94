#!/usr/bin/env python3
"""Regenerate the pinned regression record for the reference configuration."""

import json
import math
import os
from dataclasses import asdict

from bosegas.bogoliubov import build_tables
from bosegas.lattice_potential import Potential, enumerate_lattice
from bosegas.corrections import assemble_report
from bosegas.scattering import solve_eta

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "data",
                   "reference_report.json")


def main():
    pot = Potential(kappa=0.1, R=0.25)
    lattice = enumerate_lattice(40.0 * math.pi)
    sol = solve_eta(pot, lattice, 10**4, 0.75, tol=1e-11)
    report = assemble_report(build_tables(sol), 20.0 * math.pi)
    doc = {
        k: v
        for k, v in asdict(report).items()
        if isinstance(v, (int, float)) and k not in ("t_scatter_ms", "t_sums_ms")
    }
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    print(f"wrote {os.path.normpath(OUT)} with {len(doc)} fields")


if __name__ == "__main__":
    main()
