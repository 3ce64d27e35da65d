"""AC power-flow solvers over the network model.

Solves for bus voltages given per-bus complex power injections, then
computes branch flows and loading percentages against branch ratings.
Two independent solvers are provided: full-Jacobian Newton-Raphson in
polar form (the production path) and Gauss-Seidel per-bus fixed-point
iteration (slower, used as a cross-check). Every non-slack bus is a PQ
node; PV generation enters as negative load upstream of this module.

Solves are pure and deterministic: the same network and injections give
bit-identical solutions. Non-convergence is a reportable outcome, not
an exception, because overload studies intentionally push past
feasibility.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .network import Network

InjectionSet = Mapping[str, complex]


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 30
    flat_start: bool = True


# Gauss-Seidel converges linearly; the tolerance applies to the largest
# per-sweep voltage change rather than the power mismatch.
GAUSS_SEIDEL_DEFAULTS = SolverOptions(tol=1e-10, max_iter=50_000)


@dataclass(frozen=True)
class BranchFlow:
    """Complex power entering a branch at each end, in pu, plus loading."""

    branch_id: str
    kind: str
    s_from: complex
    s_to: complex
    loading_percent: float


@dataclass(frozen=True)
class PowerFlowSolution:
    """Solved state for one interval.

    Voltages are per-unit magnitude and radian angle, ordered like
    bus_ids. loading_percent of a branch is
    100 * max(|s_from|, |s_to|) / rating_pu.
    """

    bus_ids: tuple[str, ...]
    v_mag: tuple[float, ...]
    v_ang: tuple[float, ...]
    branch_flows: tuple[BranchFlow, ...]
    slack_injection: complex
    iterations: int
    converged: bool
    max_mismatch: float

    def voltage(self, bus_id: str) -> complex:
        i = self.bus_ids.index(bus_id)
        return cmath.rect(self.v_mag[i], self.v_ang[i])

    def voltages(self) -> dict[str, complex]:
        return {bus_id: self.voltage(bus_id) for bus_id in self.bus_ids}

    def loading_by_branch(self) -> dict[str, float]:
        return {f.branch_id: f.loading_percent for f in self.branch_flows}

    def voltage_range(self) -> tuple[float, float]:
        return min(self.v_mag), max(self.v_mag)


def build_ybus(net: Network) -> np.ndarray:
    """Dense bus admittance matrix ordered like net.buses.

    Diagonal entries sum the series admittances incident to the bus;
    off-diagonals are the negated series admittance of the connecting
    branch. Off-nominal transformer taps enter on the from side.
    """
    index = {bus.id: i for i, bus in enumerate(net.buses)}
    ybus = np.zeros((len(net.buses), len(net.buses)), dtype=complex)
    for branch in net.branches:
        z = branch.series_impedance_pu
        if z is None:
            raise ValueError(f"branch {branch.id} has no derived impedance")
        if abs(z) == 0.0:
            raise ValueError(f"branch {branch.id} has zero impedance (singular)")
        y = 1.0 / z
        f, t = index[branch.from_bus], index[branch.to_bus]
        tap = branch.tap
        ybus[f, f] += y / tap ** 2
        ybus[t, t] += y
        ybus[f, t] -= y / tap
        ybus[t, f] -= y / tap
    return ybus


def _injection_vector(net: Network, injections: InjectionSet) -> tuple[np.ndarray, int]:
    """Ordered injection array (slack entry zero) and the slack index."""
    slack = net.slack_id()
    expected = set(net.non_slack_ids())
    given = set(injections)
    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        parts = []
        if missing:
            parts.append(f"missing injections for: {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected injections for: {', '.join(extra)}")
        raise ValueError("; ".join(parts))
    s = np.zeros(len(net.buses), dtype=complex)
    for i, bus in enumerate(net.buses):
        if bus.id == slack:
            slack_index = i
            continue
        value = complex(injections[bus.id])
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise ValueError(f"non-finite injection at {bus.id}: {value}")
        s[i] = value
    return s, slack_index


def branch_flows(net: Network, voltages: Mapping[str, complex]) -> tuple[BranchFlow, ...]:
    """Per-branch complex power at both ends and the loading percentage."""
    flows = []
    for branch in net.branches:
        z = branch.series_impedance_pu
        if z is None:
            raise ValueError(f"branch {branch.id} has no derived impedance")
        y = 1.0 / z
        tap = branch.tap
        vf = voltages[branch.from_bus]
        vt = voltages[branch.to_bus]
        i_from = (y / tap ** 2) * vf - (y / tap) * vt
        i_to = y * vt - (y / tap) * vf
        s_from = complex(vf * i_from.conjugate())
        s_to = complex(vt * i_to.conjugate())
        rating_pu = branch.rating_kva / (1000.0 * net.s_base_mva)
        loading = float(100.0 * max(abs(s_from), abs(s_to)) / rating_pu)
        flows.append(BranchFlow(branch.id, branch.kind, s_from, s_to, loading))
    return tuple(flows)


def total_losses(net: Network, solution: PowerFlowSolution) -> complex:
    """Network series losses in MW + jMvar, summed over branch ends."""
    s_loss_pu = sum((f.s_from + f.s_to for f in solution.branch_flows), 0j)
    return s_loss_pu * net.s_base_mva


def _finish(
    net: Network,
    ybus: np.ndarray,
    voltages: np.ndarray,
    slack_index: int,
    iterations: int,
    converged: bool,
    max_mismatch: float,
) -> PowerFlowSolution:
    by_id = {bus.id: voltages[i] for i, bus in enumerate(net.buses)}
    s_slack = voltages[slack_index] * np.conj(ybus[slack_index, :] @ voltages)
    return PowerFlowSolution(
        bus_ids=net.bus_ids(),
        v_mag=tuple(float(abs(v)) for v in voltages),
        v_ang=tuple(float(cmath.phase(v)) for v in voltages),
        branch_flows=branch_flows(net, by_id),
        slack_injection=complex(s_slack),
        iterations=iterations,
        converged=converged,
        max_mismatch=float(max_mismatch),
    )


def _mismatch(ybus: np.ndarray, voltages: np.ndarray, s_spec: np.ndarray,
              pq: np.ndarray) -> tuple[np.ndarray, float]:
    s_calc = voltages * np.conj(ybus @ voltages)
    ds = s_spec - s_calc
    stacked = np.concatenate([ds[pq].real, ds[pq].imag])
    max_mis = float(np.max(np.abs(stacked))) if stacked.size else 0.0
    return stacked, max_mis


def solve_newton_raphson(
    net: Network,
    injections: InjectionSet,
    opts: SolverOptions = SolverOptions(),
) -> PowerFlowSolution:
    """Full-Jacobian Newton-Raphson power flow in polar form.

    Converged means max(|dP|, |dQ|) <= opts.tol at every non-slack bus.
    On non-convergence the best iterate seen (smallest mismatch) is
    returned with converged=False so the caller can decide.
    """
    ybus = build_ybus(net)
    s_spec, slack_index = _injection_vector(net, injections)
    n = len(net.buses)
    pq = np.array([i for i in range(n) if i != slack_index], dtype=int)

    # flat_start=False has no warm-start source in this signature, so both
    # settings begin at 1.0 per unit, zero angle.
    voltages = np.ones(n, dtype=complex)
    v_mag = np.abs(voltages)
    v_ang = np.angle(voltages)

    best_voltages = voltages.copy()
    best_mismatch = np.inf
    iterations = 0
    converged = False

    for _ in range(opts.max_iter + 1):
        voltages = v_mag * np.exp(1j * v_ang)
        mis, max_mis = _mismatch(ybus, voltages, s_spec, pq)
        if max_mis < best_mismatch:
            best_mismatch = max_mis
            best_voltages = voltages.copy()
        if max_mis <= opts.tol:
            converged = True
            break
        if iterations >= opts.max_iter:
            break

        # Complex power derivatives with respect to voltage angle and
        # magnitude; the Jacobian blocks are their real/imag parts.
        i_bus = ybus @ voltages
        diag_v = np.diag(voltages)
        diag_i = np.diag(i_bus)
        diag_vnorm = np.diag(voltages / np.abs(voltages))
        ds_dva = 1j * diag_v @ np.conj(diag_i - ybus @ diag_v)
        ds_dvm = diag_v @ np.conj(ybus @ diag_vnorm) + np.conj(diag_i) @ diag_vnorm

        j11 = ds_dva[np.ix_(pq, pq)].real
        j12 = ds_dvm[np.ix_(pq, pq)].real
        j21 = ds_dva[np.ix_(pq, pq)].imag
        j22 = ds_dvm[np.ix_(pq, pq)].imag
        jacobian = np.block([[j11, j12], [j21, j22]])

        try:
            dx = np.linalg.solve(jacobian, mis)
        except np.linalg.LinAlgError:
            break
        npq = len(pq)
        v_ang[pq] += dx[:npq]
        v_mag[pq] += dx[npq:]
        iterations += 1
        if not np.all(np.isfinite(v_mag)) or not np.all(np.isfinite(v_ang)):
            break

    final = voltages if converged else best_voltages
    final_mis = best_mismatch if not converged else _mismatch(ybus, final, s_spec, pq)[1]
    return _finish(net, ybus, final, slack_index, iterations, converged, final_mis)


def solve_gauss_seidel(
    net: Network,
    injections: InjectionSet,
    opts: SolverOptions = GAUSS_SEIDEL_DEFAULTS,
) -> PowerFlowSolution:
    """Gauss-Seidel power flow: sweep per-bus fixed-point voltage updates.

    Converged means the largest voltage change in a sweep is <= opts.tol.
    Independent of the Newton path, which makes it a usable oracle.
    """
    ybus = build_ybus(net)
    s_spec, slack_index = _injection_vector(net, injections)
    n = len(net.buses)
    pq = [i for i in range(n) if i != slack_index]

    voltages = np.ones(n, dtype=complex)
    iterations = 0
    converged = False

    for _ in range(opts.max_iter):
        max_dv = 0.0
        for i in pq:
            coupled = ybus[i, :] @ voltages - ybus[i, i] * voltages[i]
            updated = (np.conj(s_spec[i] / voltages[i]) - coupled) / ybus[i, i]
            max_dv = max(max_dv, abs(updated - voltages[i]))
            voltages[i] = updated
        iterations += 1
        if max_dv <= opts.tol:
            converged = True
            break
        if not np.all(np.isfinite(voltages)):
            break

    pq_arr = np.array(pq, dtype=int)
    _, max_mis = _mismatch(ybus, voltages, s_spec, pq_arr)
    return _finish(net, ybus, voltages, slack_index, iterations, converged, max_mis)
