"""Shared builders for solver tests: tiny and randomly generated networks."""

from __future__ import annotations

import os
import random

from gridstress import (
    Branch,
    Bus,
    CableType,
    Network,
    NominalLoad,
    derive_impedances,
)

# Fixes the property/equivalence generators only; the simulator itself
# uses no randomness.
SEED = int(os.environ.get("GRIDSTRESS_SEED", "20250810"))

S_BASE = 10.0
MV_KV = 4.16
Z_BASE_OHM = MV_KV * MV_KV / S_BASE


def two_bus_network(z_pu: complex, rating_kva: float = 10000.0) -> Network:
    """Slack feeding one load bus through a single series impedance."""
    catalog = {"line": CableType("line", z_pu.real * Z_BASE_OHM, z_pu.imag * Z_BASE_OHM)}
    net = Network(
        s_base_mva=S_BASE,
        buses=(Bus("source", "slack", MV_KV), Bus("load", "load", MV_KV)),
        branches=(Branch("source", "load", "cable", rating_kva,
                         cable_type="line", length_miles=1.0),),
        cable_catalog=catalog,
    )
    return derive_impedances(net)


def make_radial_network(rng: random.Random, n_buses: int) -> tuple[Network, dict[str, complex]]:
    """Random connected radial network plus a matching injection set.

    Branch resistance and reactance are each uniform in [0.005, 0.1] pu;
    bus active loads are uniform in [0, 0.5] pu with Q = 0.3 P.
    """
    catalog: dict[str, CableType] = {}
    buses = [Bus("bus-0", "slack", MV_KV)]
    branches = []
    injections: dict[str, complex] = {}
    for i in range(1, n_buses):
        p = rng.uniform(0.0, 0.5)
        q = 0.3 * p
        buses.append(Bus(f"bus-{i}", "load", MV_KV, NominalLoad(p * 10000.0, q * 10000.0)))
        injections[f"bus-{i}"] = complex(-p, -q)
        parent = rng.randrange(i)
        r = rng.uniform(0.005, 0.1)
        x = rng.uniform(0.005, 0.1)
        name = f"cable-{i}"
        catalog[name] = CableType(name, r * Z_BASE_OHM, x * Z_BASE_OHM)
        branches.append(Branch(f"bus-{parent}", f"bus-{i}", "cable", 10000.0,
                               cable_type=name, length_miles=1.0))
    net = Network(S_BASE, tuple(buses), tuple(branches), (), catalog)
    return derive_impedances(net), injections
