"""Doubly periodic pseudo-spectral integrator for the potential vorticity equation.

The prognostic variable is psi on an Nx x Ny node grid.  Each stage solves
``(Delta - F) psi_t = -J(psi, zeta) - U zeta_x - beta psi_x`` spectrally, where
``U`` is an optional uniform zonal background flow (``psi_total = psi - U y``).
The background flow is what lets the beta transformation, whose psi shift is
linear in y, be checked on a periodic grid.  Time stepping is classical RK4.
"""
from __future__ import annotations

import csv
import json
import math
import random
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import expr as E
from .parser import parse


class SingularOperatorError(ZeroDivisionError):
    pass


class SolverBlowUp(FloatingPointError):
    def __init__(self, t: float):
        super().__init__(f"non-finite values at t = {t:.6g}")
        self.t = t


class NonPeriodicError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    Nx: int = 64
    Ny: int = 64
    Lx: float = 2 * math.pi
    Ly: float = 2 * math.pi

    def __post_init__(self):
        for n in (self.Nx, self.Ny):
            if n < 16 or n & (n - 1):
                raise ValueError(f"grid sizes must be powers of two >= 16, got {n}")
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("domain lengths must be positive")

    @property
    def area(self) -> float:
        return self.Lx * self.Ly

    def coords(self):
        x = self.Lx * np.arange(self.Nx) / self.Nx
        y = self.Ly * np.arange(self.Ny) / self.Ny
        return np.meshgrid(x, y, indexing="ij")

    def wavenumbers(self):
        kx = 2 * math.pi * np.fft.fftfreq(self.Nx, self.Lx / self.Nx)
        ky = 2 * math.pi * np.fft.rfftfreq(self.Ny, self.Ly / self.Ny)
        return np.meshgrid(kx, ky, indexing="ij")

    def dealias_mask(self):
        nx = np.abs(np.fft.fftfreq(self.Nx, 1.0 / self.Nx))
        ny = np.fft.rfftfreq(self.Ny, 1.0 / self.Ny)
        NX, NY = np.meshgrid(nx, ny, indexing="ij")
        return (NX <= self.Nx // 3) & (NY <= self.Ny // 3)

    def rfft_weights(self):
        """Multiplicity of each half-spectrum column in the full spectrum."""
        w = np.full(self.Ny // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return np.broadcast_to(w, (self.Nx, self.Ny // 2 + 1))


@dataclass
class Field:
    data: np.ndarray
    grid: Grid
    t: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (self.grid.Nx, self.grid.Ny):
            raise ValueError(f"field shape {self.data.shape} does not match the grid")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite values")

    def copy(self) -> "Field":
        return Field(self.data.copy(), self.grid, self.t)


@dataclass
class SolverConfig:
    F: float = 1.0
    beta: float = 0.0
    dt: float = 1e-3
    t_end: float = 1.0
    dealias: bool = True
    output_every: int = 0  # steps between diagnostics records; 0 records only the ends
    mean_flow: float = 0.0
    Nx: int = 64
    Ny: int = 64
    Lx: float = 2 * math.pi
    Ly: float = 2 * math.pi

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        for name in ("F", "beta", "dt", "t_end", "mean_flow"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def grid(self) -> Grid:
        return Grid(self.Nx, self.Ny, self.Lx, self.Ly)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SolverConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown solver options {sorted(unknown)}")
        types = {"dealias": _as_bool, "output_every": int, "Nx": int, "Ny": int}
        return cls(**{k: types.get(k, float)(v) for k, v in mapping.items()})

    def to_json(self) -> dict:
        return asdict(self)


def _as_bool(v) -> bool:
    if isinstance(v, str):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {v!r}")
    return bool(v)


class _Spectral:
    """Cached wavenumber arrays for one grid and F."""

    def __init__(self, grid: Grid, F: float, dealias: bool):
        self.grid = grid
        self.kx, self.ky = grid.wavenumbers()
        self.k2 = self.kx ** 2 + self.ky ** 2
        self.mask = grid.dealias_mask() if dealias else np.ones_like(self.k2, dtype=bool)
        denom = -self.k2 - F
        self.gauge = False
        if F == 0:
            denom = denom.copy()
            denom[0, 0] = 1.0
            self.gauge = True
        elif np.any(np.abs(denom) < 1e-12 * max(1.0, abs(F))):
            raise SingularOperatorError("Helmholtz operator is singular: some k^2 + l^2 equals -F")
        self.inv = 1.0 / denom

    def fft(self, a):
        return np.fft.rfft2(a)

    def ifft(self, a):
        return np.fft.irfft2(a, s=(self.grid.Nx, self.grid.Ny))


_CACHE: dict = {}


def _spectral(grid: Grid, F: float, dealias: bool = True) -> _Spectral:
    key = (grid, float(F), bool(dealias))
    sp = _CACHE.get(key)
    if sp is None:
        sp = _CACHE[key] = _Spectral(grid, float(F), dealias)
    return sp


def helmholtz_invert(r: Field, F: float) -> Field:
    """Solve (Delta - F) chi = r; with F = 0 the mean of chi is set to zero."""
    sp = _spectral(r.grid, F)
    hat = sp.fft(r.data) * sp.inv
    if sp.gauge:
        hat[0, 0] = 0.0
    return Field(sp.ifft(hat), r.grid, r.t)


def _tendency_hat(psi_hat, sp: _Spectral, cfg: SolverConfig):
    ikx, iky = 1j * sp.kx, 1j * sp.ky
    zeta_hat = -sp.k2 * psi_hat
    ph = psi_hat * sp.mask
    zh = zeta_hat * sp.mask
    jac = sp.ifft(ikx * ph) * sp.ifft(iky * zh) - sp.ifft(iky * ph) * sp.ifft(ikx * zh)
    forcing = -sp.fft(jac) * sp.mask - cfg.beta * ikx * psi_hat - cfg.mean_flow * ikx * zeta_hat
    out = forcing * sp.inv
    if sp.gauge:
        out[0, 0] = 0.0
    return out


def rhs(psi: Field, cfg: SolverConfig) -> Field:
    sp = _spectral(psi.grid, cfg.F, cfg.dealias)
    return Field(sp.ifft(_tendency_hat(sp.fft(psi.data), sp, cfg)), psi.grid, psi.t)


def cfl_number(psi: Field, cfg: SolverConfig) -> float:
    sp = _spectral(psi.grid, cfg.F, cfg.dealias)
    h = sp.fft(psi.data)
    u = np.max(np.abs(sp.ifft(1j * sp.ky * h))) + abs(cfg.mean_flow)
    v = np.max(np.abs(sp.ifft(1j * sp.kx * h)))
    g = psi.grid
    return cfg.dt * (u * g.Nx / g.Lx + v * g.Ny / g.Ly)


def _rk4_hat(h, sp, cfg):
    dt = cfg.dt
    k1 = _tendency_hat(h, sp, cfg)
    k2 = _tendency_hat(h + 0.5 * dt * k1, sp, cfg)
    k3 = _tendency_hat(h + 0.5 * dt * k2, sp, cfg)
    k4 = _tendency_hat(h + dt * k3, sp, cfg)
    return h + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def step(psi: Field, cfg: SolverConfig) -> Field:
    """One classical RK4 step of size cfg.dt."""
    if cfl_number(psi, cfg) > 1.0:
        warnings.warn("time step exceeds the advective CFL estimate", RuntimeWarning, stacklevel=2)
    sp = _spectral(psi.grid, cfg.F, cfg.dealias)
    h = _rk4_hat(sp.fft(psi.data), sp, cfg)
    data = sp.ifft(h)
    if not np.all(np.isfinite(data)):
        raise SolverBlowUp(psi.t + cfg.dt)
    return Field(data, psi.grid, psi.t + cfg.dt)


def diagnostics(psi: Field, cfg: SolverConfig) -> dict:
    """Energy and potential enstrophy, both computed spectrally."""
    sp = _spectral(psi.grid, cfg.F, cfg.dealias)
    h = sp.fft(psi.data)
    g = psi.grid
    norm = g.area / (g.Nx * g.Ny) ** 2
    w = g.rfft_weights()
    a2 = np.abs(h) ** 2
    energy = 0.5 * norm * np.sum(w * (sp.k2 + cfg.F) * a2)
    enstrophy = 0.5 * norm * np.sum(w * (sp.k2 + cfg.F) ** 2 * a2)
    return {"t": psi.t, "energy": float(energy), "enstrophy": float(enstrophy)}


def n_steps(cfg: SolverConfig) -> int:
    n = round(cfg.t_end / cfg.dt)
    if abs(n * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    return n


def integrate(psi0: Field, cfg: SolverConfig, record=None):
    """Advance ``psi0`` to ``cfg.t_end``; returns (final field, diagnostics list).

    ``record`` is called with every diagnostics row as it is produced.
    """
    n = n_steps(cfg)
    if cfl_number(psi0, cfg) > 1.0:
        warnings.warn("time step exceeds the advective CFL estimate", RuntimeWarning, stacklevel=2)
    sp = _spectral(psi0.grid, cfg.F, cfg.dealias)
    h = sp.fft(psi0.data)
    rows = []

    def emit(field_):
        row = diagnostics(field_, cfg)
        rows.append(row)
        if record is not None:
            record(row)

    emit(psi0)
    t0 = psi0.t
    for i in range(1, n + 1):
        h = _rk4_hat(h, sp, cfg)
        if cfg.output_every and i % cfg.output_every == 0 and i != n:
            if not np.all(np.isfinite(h)):
                raise SolverBlowUp(t0 + i * cfg.dt)
            emit(Field(sp.ifft(h), psi0.grid, t0 + i * cfg.dt))
    data = sp.ifft(h)
    if not np.all(np.isfinite(data)):
        raise SolverBlowUp(t0 + n * cfg.dt)
    final = Field(data, psi0.grid, t0 + n * cfg.dt)
    if n:
        emit(final)
    return final, rows


# ---------------------------------------------------------------------------
# Fields from expressions, fixtures and studies


def sample_expr(e, grid: Grid, t: float = 0.0) -> Field:
    e = parse(e) if isinstance(e, str) else E.as_expr(e)
    extra = e.free_symbols() - {"t", "x", "y"}
    if extra:
        raise ValueError(f"unbound symbols {sorted(extra)}")
    X, Y = grid.coords()
    f = E.lambdify(e, ["t", "x", "y"])
    return Field(np.broadcast_to(f(t, X, Y), X.shape).astype(float), grid, t)


def check_periodic(e, grid: Grid, trials: int = 20, seed: int = 0, tol: float = 1e-9):
    rng = random.Random(seed)
    e = E.as_expr(e)
    for _ in range(trials):
        pt = {"t": rng.uniform(0, 1), "x": rng.uniform(0, grid.Lx), "y": rng.uniform(0, grid.Ly)}
        base = E.evaluate(e, pt)
        for z, L in (("x", grid.Lx), ("y", grid.Ly)):
            moved = E.evaluate(e, dict(pt, **{z: pt[z] + L}))
            if abs(moved - base) > tol * max(1.0, abs(base)):
                raise NonPeriodicError(f"exact solution is not periodic in {z} on the domain")


def shift_x(f: Field, dx: float) -> Field:
    """Spectral interpolation g(x, y) = f(x + dx, y)."""
    sp = _spectral(f.grid, 1.0)
    return Field(sp.ifft(sp.fft(f.data) * np.exp(1j * sp.kx * dx)), f.grid, f.t)


def random_smooth_field(grid: Grid, seed: int = 0, kmax: int = 4, amplitude: float = 1.0) -> Field:
    rng = np.random.default_rng(seed)
    X, Y = grid.coords()
    data = np.zeros_like(X)
    for kx in range(0, kmax + 1):
        for ky in range(-kmax, kmax + 1):
            if kx == 0 and ky <= 0:
                continue
            a, b = rng.normal(size=2) / (1 + kx * kx + ky * ky)
            ph = 2 * math.pi * (kx * X / grid.Lx + ky * Y / grid.Ly)
            data += a * np.cos(ph) + b * np.sin(ph)
    return Field(amplitude * data / np.max(np.abs(data)), grid)


@dataclass
class ConvergenceRow:
    dt: float
    N: int
    error: float
    order: float | None = None


def convergence_study(exact, cfg: SolverConfig, dts=(4e-3, 2e-3, 1e-3), Ns=None) -> list:
    """Max-norm errors against ``exact`` at t_end, with observed orders.

    Halving dt gives temporal orders; a list of grid sizes ``Ns`` (at the
    finest dt) gives the spatial ladder, where orders are not meaningful.
    """
    exact = parse(exact) if isinstance(exact, str) else E.as_expr(exact)
    check_periodic(exact, cfg.grid)
    rows = []
    for dt in dts:
        c = SolverConfig(**{**cfg.to_json(), "dt": dt})
        final, _ = integrate(sample_expr(exact, c.grid, 0.0), c)
        err = float(np.max(np.abs(final.data - sample_expr(exact, c.grid, final.t).data)))
        order = None
        if rows and rows[-1].error > 0 and err > 0:
            order = math.log(rows[-1].error / err) / math.log(rows[-1].dt / dt)
        rows.append(ConvergenceRow(dt, c.Nx, err, order))
    for N in Ns or ():
        c = SolverConfig(**{**cfg.to_json(), "dt": dts[-1], "Nx": N, "Ny": N})
        final, _ = integrate(sample_expr(exact, c.grid, 0.0), c)
        err = float(np.max(np.abs(final.data - sample_expr(exact, c.grid, final.t).data)))
        rows.append(ConvergenceRow(dts[-1], N, err))
    return rows


def beta_equivalence_check(psi0: Field, F: float, beta: float, t_end: float = 1.0, dt: float = 1e-3,
                           dealias: bool = True) -> float:
    """Relative max difference between the beta run and the transported beta = 0 run.

    Run A integrates the (F, beta) equation for the periodic part phi of
    psi = phi + (beta/F) y, which sees the background flow U = -beta/F.  Run B
    integrates (F, 0) from the same data.  The beta transformation predicts
    phi_A(t, x, y) = phi_B(t, x + (beta/F) t, y).
    """
    if F == 0:
        raise ValueError("transformation undefined; F must be nonzero")
    k = beta / F
    g = psi0.grid
    common = dict(F=F, dt=dt, t_end=t_end, dealias=dealias, Nx=g.Nx, Ny=g.Ny, Lx=g.Lx, Ly=g.Ly)
    a, _ = integrate(psi0, SolverConfig(beta=beta, mean_flow=-k, **common))
    b, _ = integrate(psi0, SolverConfig(beta=0.0, **common))
    b_moved = shift_x(b, k * b.t)
    return float(np.max(np.abs(a.data - b_moved.data)) / max(np.max(np.abs(a.data)), 1e-300))


# ---------------------------------------------------------------------------
# I/O


def write_csv(f: Field, path) -> None:
    g = f.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Nx", "Ny", "Lx", "Ly", "t"])
        w.writerow([g.Nx, g.Ny, repr(g.Lx), repr(g.Ly), repr(f.t)])
        for row in f.data:
            w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0] != ["Nx", "Ny", "Lx", "Ly", "t"]:
        raise ValueError("not a field CSV file")
    Nx, Ny = int(rows[1][0]), int(rows[1][1])
    Lx, Ly, t = (float(v) for v in rows[1][2:5])
    data = np.array([[float(v) for v in r] for r in rows[2:]])
    return Field(data, Grid(Nx, Ny, Lx, Ly), t)


def write_raw(f: Field, path) -> None:
    """Little-endian float64 dump plus a JSON sidecar at ``path + '.json'``."""
    path = Path(path)
    f.data.astype("<f8").tofile(path)
    g = f.grid
    meta = {"Nx": g.Nx, "Ny": g.Ny, "Lx": g.Lx, "Ly": g.Ly, "t": f.t, "dtype": "float64",
            "byteorder": "little", "order": "row-major"}
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2))


def read_raw(path) -> Field:
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    data = np.fromfile(path, dtype="<f8").reshape(meta["Nx"], meta["Ny"])
    return Field(data, Grid(meta["Nx"], meta["Ny"], meta["Lx"], meta["Ly"]), meta["t"])


def write_diagnostics(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "E", "Z"])
        for r in rows:
            w.writerow([repr(r["t"]), repr(r["energy"]), repr(r["enstrophy"])])
