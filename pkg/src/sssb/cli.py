"""Scenario runner: ``sssb run`` sweeps a parameter grid and writes CSV + JSON,
``sssb compare`` diffs a run against a golden CSV.

Exit codes: 0 when every row is within its tolerance, 1 when an invariant
fails, 2 for invalid input.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import channels, groups, observables as obs, purify, statmech
from .lattice import Lattice, column_x_links
from .qcore import KET_0, KET_PLUS, PauliString, product_state

COLUMNS = ["scenario", "L", "Lx", "Ly", "p", "theta", "beta", "r", "observable",
           "value", "error", "oracle", "abs_delta", "tolerance"]

SCENARIOS = ("sssb-1d", "sssb-2d", "oneform-2d", "subsystem-2d", "toric-dephase", "toric-fermion",
             "groups", "gapless-1d", "pc-scan")

DEFAULT_SEED = 7
EXACT_TOL = 1e-9


class InvalidInput(ValueError):
    pass


@dataclass
class ResultRow:
    scenario: str
    observable: str
    value: float
    L: int | None = None
    Lx: int | None = None
    Ly: int | None = None
    p: float | None = None
    theta: float | None = None
    beta: float | None = None
    r: int | None = None
    error: float | None = None
    oracle: float | None = None
    tolerance: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def abs_delta(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.value - self.oracle)

    @property
    def ok(self) -> bool:
        if self.oracle is None or self.tolerance is None:
            return True
        return self.abs_delta <= self.tolerance

    def cells(self) -> list[str]:
        vals = dict(scenario=self.scenario, L=self.L, Lx=self.Lx, Ly=self.Ly, p=self.p, theta=self.theta,
                    beta=self.beta, r=self.r, observable=self.observable, value=self.value, error=self.error,
                    oracle=self.oracle, abs_delta=self.abs_delta, tolerance=self.tolerance)
        return [_fmt(vals[c]) for c in COLUMNS]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if v == math.inf:
            return "inf"
        return format(float(v), ".17g")
    return str(v)


def _parse_float(s: str) -> float:
    return math.inf if s == "inf" else float(s)


# --------------------------------------------------------------------------
# scenario config


@dataclass
class Scenario:
    name: str
    L: list[int]
    Lx: int | None
    Ly: int | None
    grid: list[tuple[str, float]]  # ("p", value) or ("theta", value)
    r: list[int] | None
    observables: list[str] | None
    seed: int
    sweeps: int | None = None

    def validate(self) -> None:
        if self.name not in SCENARIOS:
            raise InvalidInput(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        for kind, v in self.grid:
            if kind == "p" and not 0.0 <= v <= 0.5:
                raise InvalidInput(f"--p {v} outside [0, 0.5]")
            if kind == "theta" and not 0.0 <= v <= math.pi / 4 + 1e-12:
                raise InvalidInput(f"--theta {v} outside [0, pi/4]")
        if self.name == "sssb-1d" and any(L > 12 or L < 2 for L in self.L):
            raise InvalidInput("sssb-1d needs 2 <= L <= 12 (dense budget)")
        if self.name in ("sssb-2d", "subsystem-2d") and (self.Lx or 3) * (self.Ly or 3) > 12:
            raise InvalidInput("2D dense scenarios need Lx*Ly <= 12")
        if self.name in ("oneform-2d", "toric-dephase", "toric-fermion") and 2 * (self.Lx or 2) * (self.Ly or 2) > 14:
            raise InvalidInput("link registers need 2*Lx*Ly <= 14")
        if self.name == "gapless-1d" and any(2 * L - 1 > purify.GAPLESS_MAX_QUBITS for L in self.L):
            raise InvalidInput(f"gapless-1d needs 2L-1 <= {purify.GAPLESS_MAX_QUBITS}")
        if self.name == "pc-scan" and any(L not in (8, 16, 32) and L > 64 for L in self.L):
            raise InvalidInput("pc-scan sizes must be <= 64")


def _pmap(kind: str, v: float) -> statmech.ParameterMap:
    return statmech.param_map(**{kind: v})


def _base(sc: Scenario, pm: statmech.ParameterMap, **kw) -> dict:
    return dict(scenario=sc.name, p=pm.p, theta=pm.theta, beta=pm.beta, params=pm.as_dict(), **kw)


# --------------------------------------------------------------------------
# jobs: each returns a list of rows for one grid point


def _job_sssb_1d(sc: Scenario, L: int, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    lat = Lattice.chain(L)
    observ = sc.observables or ["renyi2", "conventional", "typeII", "fidelity", "annealed"]
    rs = sc.r or list(range(1, L))
    rows = []
    psi = None
    if "annealed" in observ and 2 * L - 1 <= 14:
        psi = purify.build_1d_spt(L, pm.theta)
        rho = psi.reduced()
    else:
        rho = channels.bond_dephase(lat, pm.p)(product_state([KET_PLUS] * L))
    for r in rs:
        if not 1 <= r < L:
            raise InvalidInput(f"r={r} outside [1, {L})")
        pair = obs.ChargedPair.zz(L, 0, r)
        base = _base(sc, pm, L=L, r=r)
        for name in observ:
            if name == "renyi2":
                rows.append(ResultRow(observable=name, value=obs.renyi2_correlator(rho, pair),
                                      oracle=statmech.ising1d_corr(pm.renyi2_coupling, r, L), tolerance=EXACT_TOL, **base))
            elif name == "conventional":
                rows.append(ResultRow(observable=name, value=obs.conventional_correlator(rho, pair), oracle=0.0,
                                      tolerance=1e-10, **base))
            elif name == "typeII":
                rows.append(ResultRow(observable=name, value=obs.typeII_strange_correlator(rho, pair),
                                      oracle=statmech.ising1d_corr(pm.beta, r, L), tolerance=EXACT_TOL, **base))
            elif name == "fidelity":
                rows.append(ResultRow(observable=name, value=obs.fidelity_correlator(rho, pair), **base))
            elif name == "annealed":
                if psi is None:
                    continue
                res = obs.annealed_strange_correlator_full(psi, pair.product)
                rows.append(ResultRow(observable="annealed", value=res.uniform,
                                      oracle=statmech.ising1d_corr(pm.beta, r, L), tolerance=EXACT_TOL, **base))
                rows.append(ResultRow(observable="annealed_born", value=res.born_weighted, **base))
            else:
                raise InvalidInput(f"unknown observable {name!r} for {sc.name}")
    return rows


def _job_sssb_2d(sc: Scenario, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    Lx, Ly = sc.Lx or 3, sc.Ly or 3
    lat = Lattice.square(Lx, Ly)
    n = lat.n_vertices
    rho = channels.bond_dephase(lat, pm.p)(product_state([KET_PLUS] * n))
    rows = []
    observ = sc.observables or ["renyi2", "conventional", "typeII"]
    for r in sc.r or list(range(1, Lx // 2 + 1)):
        pair = obs.ChargedPair.zz(n, 0, lat.vertex(r, 0))
        base = _base(sc, pm, Lx=Lx, Ly=Ly, r=r)
        for name in observ:
            if name == "renyi2":
                rows.append(ResultRow(observable=name, value=obs.renyi2_correlator(rho, pair),
                                      oracle=statmech.ising2d_tm_corr(pm.renyi2_coupling, Lx, Ly, r), tolerance=1e-8, **base))
            elif name == "conventional":
                rows.append(ResultRow(observable=name, value=obs.conventional_correlator(rho, pair), oracle=0.0,
                                      tolerance=1e-10, **base))
            elif name == "typeII":
                rows.append(ResultRow(observable=name, value=obs.typeII_strange_correlator(rho, pair),
                                      oracle=statmech.ising2d_tm_corr(pm.beta, Lx, Ly, r), tolerance=1e-8, **base))
            elif name == "fidelity":
                rows.append(ResultRow(observable=name, value=obs.fidelity_correlator(rho, pair), **base))
            else:
                raise InvalidInput(f"unknown observable {name!r} for {sc.name}")
    return rows


def _job_oneform(sc: Scenario, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    Lx, Ly = sc.Lx or 2, sc.Ly or 2
    lat = Lattice.square(Lx, Ly)
    n = lat.n_links
    rho = channels.star_channel(lat, pm.p)(product_state([KET_0] * n))
    rows = []
    for r in sc.r or [1]:
        if not 1 <= r < Lx:
            raise InvalidInput(f"Wilson separation {r} outside [1, {Lx})")
        W0 = PauliString.x_on(n, column_x_links(lat, 0))
        Wr = PauliString.x_on(n, column_x_links(lat, r))
        masks = [_zmask_flips(channels.star_operator(lat, u)) for u in range(lat.n_vertices)]
        ren_or, _ = statmech.pauli_mixture_correlators(pm.p, masks, _zmask_flips(W0 * Wr))
        base = _base(sc, pm, Lx=Lx, Ly=Ly, r=r)
        rows.append(ResultRow(observable="renyi2_wilson", value=obs.renyi2_correlator(rho, obs.ChargedPair(W0, Wr)),
                              oracle=ren_or, tolerance=1e-10, **base))
        rows.append(ResultRow(observable="conventional_wilson",
                              value=obs.conventional_correlator(rho, obs.ChargedPair(W0, Wr)), **base))
    return rows


def _zmask_flips(P: PauliString) -> int:
    # syndrome against single-qubit Z stabilizers of |0...0>
    return P.x_mask


def _xmask_flips(P: PauliString) -> int:
    # syndrome against single-qubit X stabilizers of |+...+>
    return P.z_mask


def _job_subsystem(sc: Scenario, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    Lx, Ly = sc.Lx or 3, sc.Ly or 3
    lat = Lattice.square(Lx, Ly)
    n = lat.n_vertices
    rho = channels.plaquette_channel(lat, pm.p)(product_state([KET_PLUS] * n))
    masks = [_xmask_flips(channels.plaquette_operator(lat, q, on="corners")) for q in lat.plaquettes()]
    rows = []
    for r in sc.r or [1]:
        corners = [lat.vertex(0, 0), lat.vertex(r, 0), lat.vertex(0, r), lat.vertex(r, r)]
        Q = PauliString.z_on(n, corners)
        ren_or, _ = statmech.pauli_mixture_correlators(pm.p, masks, _xmask_flips(Q))
        base = _base(sc, pm, Lx=Lx, Ly=Ly, r=r)
        rows.append(ResultRow(observable="renyi2_corner", value=obs.renyi2_correlator(rho, Q), oracle=ren_or,
                              tolerance=1e-10, **base))
        rows.append(ResultRow(observable="conventional_corner", value=obs.conventional_correlator(rho, Q), **base))
    return rows


def _job_toric_dephase(sc: Scenario, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    Lx, Ly = sc.Lx or 2, sc.Ly or 2
    lat = Lattice.square(Lx, Ly)
    psi = purify.build_toric_code(Lx, Ly)
    rho = channels.toric_dephase(lat, pm.p)(psi)
    n_v = lat.n_vertices

    def syndrome(P: PauliString) -> int:
        # stars flipped by the Z part
        return sum(1 << v for v in range(n_v) if not P.commutes(channels.star_operator(lat, v)))

    masks = [syndrome(PauliString.z_on(lat.n_links, [k])) for k in range(lat.n_links)]
    rows = []
    for r in sc.r or [1]:
        path = [lat.link_x(x, 0) for x in range(r)]
        Q = PauliString.z_on(lat.n_links, path)
        ren_or, _ = statmech.pauli_mixture_correlators(pm.p, masks, syndrome(Q))
        base = _base(sc, pm, Lx=Lx, Ly=Ly, r=r)
        rows.append(ResultRow(observable="renyi2_zstring", value=obs.renyi2_correlator(rho, Q), oracle=ren_or,
                              tolerance=1e-10, **base))
        rows.append(ResultRow(observable="conventional_zstring", value=obs.conventional_correlator(rho, Q), oracle=0.0,
                              tolerance=1e-10, **base))
    return rows


def _job_toric_fermion(sc: Scenario, kind: str, v: float) -> list[ResultRow]:
    pm = _pmap(kind, v)
    Lx, Ly = sc.Lx or 2, sc.Ly or 2
    lat = Lattice.square(Lx, Ly)
    ch = channels.toric_fermion_channel(lat, pm.p)
    base = _base(sc, pm, Lx=Lx, Ly=Ly)
    Wx, Wy = channels.fermion_loops(lat)
    rows = [
        ResultRow(observable="strong_fermion_loop_x", value=float(channels.is_strong_symmetric_channel(ch, Wx)),
                  oracle=1.0, tolerance=0.0, **base),
        ResultRow(observable="strong_fermion_loop_y", value=float(channels.is_strong_symmetric_channel(ch, Wy)),
                  oracle=1.0, tolerance=0.0, **base),
        ResultRow(observable="trace_preserving", value=float(ch.is_trace_preserving()), oracle=1.0, tolerance=0.0,
                  **base),
    ]
    psi = purify.build_toric_code(Lx, Ly)
    rho = ch(psi)
    rows.append(ResultRow(observable="fermion_loop_x", value=float(np.real(np.trace(rho @ Wx.to_matrix()))), **base))
    rows.append(ResultRow(observable="trace", value=float(np.real(np.trace(rho))), oracle=1.0, tolerance=1e-10, **base))
    return rows


def _job_groups(sc: Scenario, rep_name: str, L: int) -> list[ResultRow]:
    rep = groups.rep_by_name(rep_name)
    base = dict(scenario=sc.name, L=L, params={"rep": rep.name})
    rows = []
    P0 = groups.identity_projector(rep, L)
    rows.append(ResultRow(observable=f"{rep_name}:N_I", value=float(groups.identity_sector_count(rep, L)),
                          oracle=float(np.linalg.matrix_rank(P0, tol=1e-8)), tolerance=0.0, **base))
    row = groups.purity_asymptote_report(rep, [L])[0]
    rows.append(ResultRow(observable=f"{rep_name}:purity_ratio", value=row.ratio, **base))
    try:
        O = groups.charged_operator(rep)
        mult = groups.make_multiplet(rep, [O])
    except ValueError:
        mult = groups.standard_multiplet_s3(rep)
    mc = groups.multiplet_correlators(rep, mult, L, 0, L // 2)
    rows.append(ResultRow(observable=f"{rep_name}:conventional", value=float(np.abs(mc.conventional).max()), **base))
    formula = groups.renyi2_trace_formula(rep, mult.ops[0], mult.ops[0], L)
    rows.append(ResultRow(observable=f"{rep_name}:renyi2", value=float(mc.renyi2[0, 0].real), oracle=float(formula.real),
                          tolerance=1e-10, **base))
    return rows


def _job_gapless(sc: Scenario, L: int) -> list[ResultRow]:
    gs = purify.build_gapless_spt(L)
    rho = gs.psi.reduced()
    rows = [ResultRow(scenario=sc.name, L=L, observable="residual", value=gs.residual, oracle=0.0, tolerance=1e-8)]
    rs, vals = [], []
    for r in sc.r or list(range(2, min(6, L - 1) + 1)):
        i = (L - 1 - r) // 2
        val = obs.renyi2_correlator(rho, obs.ChargedPair.zz(L, i, i + r))
        dual, = statmech.gapless_renyi2_dual(L, [(i, i + r)])
        rows.append(ResultRow(scenario=sc.name, L=L, r=r, observable="renyi2", value=val, oracle=dual,
                              tolerance=1e-10))
        rows.append(ResultRow(scenario=sc.name, L=L, r=r, observable="string",
                              value=purify.string_order(gs.psi, (i, i + r))))
        rs.append(r)
        vals.append(val)
    if len(rs) >= 2:
        eta, _ = statmech.fit_power_law(rs, vals)
        rows.append(ResultRow(scenario=sc.name, L=L, observable="renyi2_exponent", value=eta, oracle=0.5,
                              tolerance=0.15))
    return rows


def _job_pc_scan(sc: Scenario, L: int, K: float) -> list[ResultRow]:
    sweeps = sc.sweeps or _default_sweeps(L)
    res = statmech.ising2d_mc(K, L, sweeps, sc.seed, rmax=0)
    pm = statmech.param_map(beta=K / 2)
    return [ResultRow(scenario=sc.name, L=L, p=pm.p, beta=pm.beta, observable="binder", value=res.binder,
                      error=res.binder_err, params={**pm.as_dict(), "K": K, "sweeps": sweeps}),
            ResultRow(scenario=sc.name, L=L, p=pm.p, beta=pm.beta, observable="m2", value=res.m2, error=res.m2_err,
                      params={**pm.as_dict(), "K": K, "sweeps": sweeps})]


PC_COUPLINGS = (0.425, 0.4325, 0.44, 0.4475, 0.455)


def _default_sweeps(L: int) -> int:
    return {8: 200_000, 16: 200_000, 32: 200_000}.get(L, 100_000)


# --------------------------------------------------------------------------


def plan(sc: Scenario) -> list[tuple[Callable, tuple]]:
    """Jobs in canonical order."""
    grid = sc.grid or [("p", 0.5)]
    if sc.name == "sssb-1d":
        return [(_job_sssb_1d, (sc, L, k, v)) for L in sc.L for k, v in grid]
    if sc.name == "sssb-2d":
        return [(_job_sssb_2d, (sc, k, v)) for k, v in grid]
    if sc.name == "oneform-2d":
        return [(_job_oneform, (sc, k, v)) for k, v in grid]
    if sc.name == "subsystem-2d":
        return [(_job_subsystem, (sc, k, v)) for k, v in grid]
    if sc.name == "toric-dephase":
        return [(_job_toric_dephase, (sc, k, v)) for k, v in grid]
    if sc.name == "toric-fermion":
        return [(_job_toric_fermion, (sc, k, v)) for k, v in grid]
    if sc.name == "groups":
        names = sc.observables or ["Z2", "Z3", "S3"]
        return [(_job_groups, (sc, name, L)) for name in names for L in sc.L]
    if sc.name == "gapless-1d":
        return [(_job_gapless, (sc, L)) for L in sc.L]
    if sc.name == "pc-scan":
        return [(_job_pc_scan, (sc, L, K)) for L in sc.L for K in PC_COUPLINGS]
    raise InvalidInput(sc.name)


def _call(job):
    fn, args = job
    return fn(*args)


def execute(sc: Scenario, threads: int = 1) -> list[ResultRow]:
    sc.validate()
    jobs = plan(sc)
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_call, jobs))  # map preserves submission order
    else:
        chunks = [_call(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    if sc.name == "pc-scan":
        rows += _pc_summary(sc, rows)
    return rows


def _pc_summary(sc: Scenario, rows: list[ResultRow]) -> list[ResultRow]:
    results = {}
    for r in rows:
        if r.observable == "binder":
            results[(r.L, r.params["K"])] = statmech.IsingMCResult(r.params["K"], r.L, r.params["sweeps"], math.nan,
                                                                    math.nan, r.value, r.error, np.empty(0), np.empty(0))
    sizes = sorted({L for L, _ in results})
    if len(sizes) < 2:
        return []
    scan = statmech.binder_crossing(PC_COUPLINGS, sizes, 0, sc.seed, results=results)
    pm = statmech.param_map(beta=scan.K_star / 2)
    return [ResultRow(scenario=sc.name, observable="p_c", p=pm.p, beta=pm.beta, value=scan.p_c, error=scan.p_c_err,
                      oracle=statmech.P_CRITICAL, tolerance=0.005, params={**pm.as_dict(), "K_star": scan.K_star}),
            ResultRow(scenario=sc.name, observable="K_star", value=scan.K_star, error=scan.K_star_err,
                      oracle=statmech.K_CRITICAL, tolerance=0.0155)]


# --------------------------------------------------------------------------
# output


def write_outputs(rows: list[ResultRow], out: Path, sc: Scenario) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    out.write_text(buf.getvalue())
    meta = {
        "scenario": sc.name,
        "seed": sc.seed,
        "annealed_weighting": "uniform over ancilla patterns (annealed); Born-weighted value reported as annealed_born",
        "rows": [dict(zip(COLUMNS, r.cells()), params=r.params) for r in rows],
    }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=1, default=_json_default))


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def read_rows(path: Path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames != COLUMNS:
        raise InvalidInput(f"{path}: columns {reader.fieldnames} do not match the schema")
    return list(reader)


@dataclass
class DiffEntry:
    index: int
    key: tuple
    golden: float
    current: float
    delta: float
    tolerance: float


def compare(fixture: Path, run_output: Path, default_tol: float = EXACT_TOL) -> list[DiffEntry]:
    """Rows whose value differs from the fixture by more than the row tolerance."""
    gold = read_rows(fixture)
    cur = read_rows(run_output)
    if len(gold) != len(cur):
        raise InvalidInput(f"row count differs: fixture {len(gold)} vs run {len(cur)}")
    keys = ["scenario", "L", "Lx", "Ly", "p", "theta", "beta", "r", "observable"]
    diffs = []
    for i, (g, c) in enumerate(zip(gold, cur)):
        kg, kc = tuple(g[k] for k in keys), tuple(c[k] for k in keys)
        if kg != kc:
            raise InvalidInput(f"row {i}: key {kc} does not match fixture {kg}")
        gv, cv = _parse_float(g["value"]), _parse_float(c["value"])
        tol = _parse_float(g["tolerance"]) if g["tolerance"] else default_tol
        delta = abs(gv - cv) if not (math.isinf(gv) and gv == cv) else 0.0
        if not delta <= tol:
            diffs.append(DiffEntry(i, kg, gv, cv, delta, tol))
    return diffs


# --------------------------------------------------------------------------
# argument parsing


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def _float_list(s: str) -> list[float]:
    out = []
    for x in s.split(","):
        x = x.strip()
        if not x:
            continue
        if "pi" in x:
            # accept e.g. "pi/8"
            num, _, den = x.partition("/")
            coef = num.replace("pi", "").strip() or "1"
            out.append(float(coef) * math.pi / (float(den) if den else 1.0))
        else:
            out.append(float(x))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sssb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--L", type=_int_list, default=None, help="chain length(s), comma separated")
    run.add_argument("--Lx", type=int, default=None)
    run.add_argument("--Ly", type=int, default=None)
    g = run.add_mutually_exclusive_group()
    g.add_argument("--p", type=_float_list, default=None, help="error-rate grid, comma separated")
    g.add_argument("--theta", type=_float_list, default=None, help="gate-angle grid (accepts pi/8)")
    run.add_argument("--r", type=_int_list, default=None, help="separations, comma separated")
    run.add_argument("--observables", default=None, help="comma separated observable names")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--sweeps", type=int, default=None, help="Monte Carlo sweeps per point")
    run.add_argument("--out", type=Path, default=Path("results.csv"))
    run.add_argument("--fixture", type=Path, default=None, help="compare against this golden CSV after running")
    cmp_ = sub.add_parser("compare", help="diff a run CSV against a golden CSV")
    cmp_.add_argument("--fixture", type=Path, required=True)
    cmp_.add_argument("run_output", type=Path)
    return ap


def _env_int(name: str) -> int | None:
    v = os.environ.get(name)
    if v is None or v == "":
        return None
    try:
        return int(v)
    except ValueError:
        raise InvalidInput(f"{name}={v!r} is not an integer") from None


def scenario_from_args(a: argparse.Namespace) -> Scenario:
    default_L = {"sssb-1d": [8], "groups": [4], "gapless-1d": [8], "pc-scan": [8, 16, 32]}.get(a.scenario, [0])
    grid = [("p", v) for v in a.p] if a.p else [("theta", v) for v in a.theta] if a.theta else []
    seed = a.seed if a.seed is not None else _env_int("SSSB_SEED")
    return Scenario(
        name=a.scenario,
        L=a.L or default_L,
        Lx=a.Lx,
        Ly=a.Ly,
        grid=grid,
        r=a.r,
        observables=a.observables.split(",") if a.observables else None,
        seed=DEFAULT_SEED if seed is None else seed,
        sweeps=a.sweeps,
    )


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if a.command == "compare":
            diffs = compare(a.fixture, a.run_output)
            for d in diffs:
                print(f"row {d.index} {d.key}: fixture {d.golden!r} run {d.current!r} |delta| {d.delta:.3e} > {d.tolerance:.1e}")
            print(f"{len(diffs)} row(s) differ")
            return 1 if diffs else 0
        sc = scenario_from_args(a)
        threads = a.threads if a.threads is not None else (_env_int("SSSB_THREADS") or 1)
        rows = execute(sc, threads)
        write_outputs(rows, a.out, sc)
        failed = [r for r in rows if not r.ok]
        for r in rows:
            if r.oracle is not None:
                flag = "ok " if r.ok else "FAIL"
                print(f"{flag} {r.observable:<22} L={_fmt(r.L) or '-':>3} p={_fmt(r.p) or '-':<20} r={_fmt(r.r) or '-':>2} "
                      f"value={r.value:.12g} oracle={r.oracle:.12g}")
        print(f"{len(rows)} rows written to {a.out}; {len(failed)} invariant failure(s)")
        if a.fixture is not None:
            diffs = compare(a.fixture, a.out)
            print(f"{len(diffs)} row(s) differ from {a.fixture}")
            if diffs:
                return 1
        return 1 if failed else 0
    except (InvalidInput, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
