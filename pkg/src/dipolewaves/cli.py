"""Configuration-driven command line: solve, spectrum, moment, evolve, perturb, selftest.

A run is defined by one YAML file (see ``DEFAULT_CONFIG``).  Every output
carries the config hash and the artifact version; a JSON manifest per command
records the full config, library versions and timings.

Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.
"""

import csv
import hashlib
import json
import platform
import subprocess
import sys
import time
from importlib import metadata
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import click
import numpy as np
import scipy
import yaml

from . import __version__
from . import dynamics as dy
from . import stability as sb
from . import steady as st
from .errors import (AmbiguousSignature, CompatibilityViolated, ConfigError, DegenerateGeometry,
                     DipoleWaveError)
from .surface import Grid

DEFAULT_CONFIG = """\
# lengths in units of the undisturbed vortex-pair depth scale; g = b = 1 by default
geometry:
  a0: 2.0          # depth of the pair midpoint
  rho0: 1.0        # half separation of the two centers
strengths:
  gamma1: 1.0
  gamma2: null     # null: derived from the compatibility condition
epsilon: 0.01
b: 1.0             # surface tension coefficient
g: 1.0             # gravity
grid:
  L: 20.0          # half length of the periodic box
  N: 256           # nodes (power of two)
  M: 8             # Dirichlet-Neumann expansion order
solver:
  tol: 1.0e-10     # Newton sup-norm residual
schedule:
  steps: 10        # continuation steps in eps from 0 (steps + 1 branch points)
moment:
  n: 5             # branch points in c
  dct_frac: 0.005  # spacing in c_t relative to c_t0
  tol: 1.0e-12
evolve:
  dt: 0.005        # time units
  T: 1.0
  stride: 20       # steps between recorded snapshots
  form: hamiltonian
  point: -1        # branch index to evolve
experiment:
  direction: chi_c # chi_c | transverse | random | translation
  amplitude: 1.0e-4
  T: 100.0
  dt: 0.05
  samples: 50
  order: null      # DNO order for the run (null: grid.M)
  form: direct
seed: 0
threads: 1
"""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class GeometryCfg:
    a0: float = 2.0
    rho0: float = 1.0


@dataclass
class StrengthsCfg:
    gamma1: float = 1.0
    gamma2: float = None


@dataclass
class GridCfg:
    L: float = 20.0
    N: int = 256
    M: int = 8


@dataclass
class SolverCfg:
    tol: float = 1e-10


@dataclass
class ScheduleCfg:
    steps: int = 10
    values: list = None


@dataclass
class MomentCfg:
    n: int = 5
    dct_frac: float = 0.005
    tol: float = 1e-12


@dataclass
class EvolveCfg:
    dt: float = 0.005
    T: float = 1.0
    stride: int = 20
    form: str = "hamiltonian"
    point: int = -1


@dataclass
class ExperimentCfg:
    direction: str = "chi_c"
    amplitude: float = 1e-4
    T: float = 100.0
    dt: float = 0.05
    samples: int = 50
    order: int = None
    form: str = "direct"


_SECTIONS = {"geometry": GeometryCfg, "strengths": StrengthsCfg, "grid": GridCfg,
             "solver": SolverCfg, "schedule": ScheduleCfg, "moment": MomentCfg,
             "evolve": EvolveCfg, "experiment": ExperimentCfg}


@dataclass
class RunConfig:
    geometry: GeometryCfg = field(default_factory=GeometryCfg)
    strengths: StrengthsCfg = field(default_factory=StrengthsCfg)
    epsilon: float = 0.01
    b: float = 1.0
    g: float = 1.0
    grid: GridCfg = field(default_factory=GridCfg)
    solver: SolverCfg = field(default_factory=SolverCfg)
    schedule: ScheduleCfg = field(default_factory=ScheduleCfg)
    moment: MomentCfg = field(default_factory=MomentCfg)
    evolve: EvolveCfg = field(default_factory=EvolveCfg)
    experiment: ExperimentCfg = field(default_factory=ExperimentCfg)
    seed: int = 0
    threads: int = 1

    # -- derived quantities
    @property
    def gamma2(self):
        s, gm = self.strengths, self.geometry
        return st.compatibility_gamma2(gm.a0, gm.rho0, s.gamma1) if s.gamma2 is None else s.gamma2

    def make_grid(self):
        return Grid(self.grid.L, self.grid.N)

    def params(self):
        gm = self.geometry
        c0 = st.base_speed(gm.a0, gm.rho0, self.strengths.gamma1, self.gamma2)
        return st.SteadyParams(0.0, c0, self.strengths.gamma1, self.gamma2, self.b, self.g)

    def eps_schedule(self):
        if self.schedule.values is not None:
            return [float(e) for e in self.schedule.values]
        return [float(e) for e in np.linspace(0.0, self.epsilon, self.schedule.steps + 1)]

    def to_dict(self):
        return asdict(self)

    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d, lines=None):
        lines = lines or {}
        d = {} if d is None else d
        where = lambda key: f"line {lines[key]}: " if key in lines else ""
        if not isinstance(d, dict):
            raise ConfigError("top level of the config must be a mapping")
        kw = {}
        top = {f.name: f for f in fields(cls)}
        for key, val in d.items():
            if key not in top:
                raise ConfigError(f"{where(key)}unknown key {key!r}")
            if key in _SECTIONS:
                if not isinstance(val, dict):
                    raise ConfigError(f"{where(key)}{key} must be a mapping")
                sec = _SECTIONS[key]
                names = {f.name: f for f in fields(sec)}
                sub = {}
                for k, v in val.items():
                    if k not in names:
                        raise ConfigError(f"{where(key + '.' + k)}unknown key {key}.{k}")
                    sub[k] = _coerce(v, names[k], f"{key}.{k}", where(key + "." + k))
                kw[key] = sec(**sub)
            else:
                kw[key] = _coerce(val, top[key], key, where(key))
        cfg = cls(**kw)
        cfg.validate(where)
        return cfg

    def validate(self, where=lambda key: ""):
        gm = self.geometry
        if not (0 < gm.rho0 < gm.a0):
            raise DegenerateGeometry(f"{where('geometry.rho0')}need 0 < rho0 < a0, "
                                     f"got a0={gm.a0}, rho0={gm.rho0}")
        if self.strengths.gamma2 is not None:
            ref = st.compatibility_gamma2(gm.a0, gm.rho0, self.strengths.gamma1)
            if abs(self.strengths.gamma2 - ref) > 1e-12 * abs(ref):
                raise CompatibilityViolated(f"{where('strengths.gamma2')}gamma2={self.strengths.gamma2} "
                                            f"violates compatibility (expected {ref!r})")
        checks = [
            ("epsilon", 0 <= self.epsilon < 1, "epsilon must lie in [0, 1)"),
            ("b", self.b > 0, "b must be positive"),
            ("g", self.g > 0, "g must be positive"),
            ("grid.N", self.grid.N >= 64 and not self.grid.N & (self.grid.N - 1),
             "N must be a power of two >= 64"),
            ("grid.L", self.grid.L > 0, "L must be positive"),
            ("grid.M", 1 <= self.grid.M <= 16, "M must lie in 1..16"),
            ("solver.tol", self.solver.tol > 0, "tol must be positive"),
            ("schedule.steps", self.schedule.steps >= 1, "steps must be >= 1"),
            ("moment.n", self.moment.n >= 5 and self.moment.n % 2 == 1, "n must be odd and >= 5"),
            ("moment.dct_frac", self.moment.dct_frac > 0, "dct_frac must be positive"),
            ("evolve.dt", self.evolve.dt > 0, "dt must be positive"),
            ("evolve.T", self.evolve.T > 0, "T must be positive"),
            ("evolve.stride", self.evolve.stride >= 1, "stride must be >= 1"),
            ("evolve.form", self.evolve.form in ("hamiltonian", "direct"), "form must be hamiltonian or direct"),
            ("experiment.direction", self.experiment.direction in ("chi_c", "transverse", "random", "translation"),
             "direction must be chi_c, transverse, random or translation"),
            ("experiment.amplitude", self.experiment.amplitude >= 0, "amplitude must be >= 0"),
            ("experiment.dt", self.experiment.dt > 0, "dt must be positive"),
            ("experiment.samples", self.experiment.samples >= 1, "samples must be >= 1"),
            ("experiment.form", self.experiment.form in ("hamiltonian", "direct"),
             "form must be hamiltonian or direct"),
            ("threads", self.threads >= 1, "threads must be >= 1"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{where(key)}{key}: {msg}")
        if self.schedule.values is not None:
            v = self.schedule.values
            if not v or any(e < 0 for e in v) or list(v) != sorted(v):
                raise ConfigError(f"{where('schedule.values')}schedule.values must be nondecreasing and >= 0")
        # the vortex guard of the dynamics needs separation >> h
        if gm.a0 - gm.rho0 <= 3 * 2 * self.grid.L / self.grid.N:
            raise ConfigError(f"{where('grid.N')}grid spacing too coarse for a0 - rho0 = {gm.a0 - gm.rho0}")


def _coerce(val, f, key, loc):
    typ = f.type
    if val is None:
        if f.default is None:
            return None
        raise ConfigError(f"{loc}{key} may not be null")
    try:
        if typ is float:
            if isinstance(val, bool):
                raise TypeError
            return float(val)
        if typ is int:
            if isinstance(val, bool) or (isinstance(val, float) and not val.is_integer()):
                raise TypeError
            return int(val)
        if typ is str:
            if not isinstance(val, str):
                raise TypeError
            return val
        if typ is list:
            return [float(x) for x in val]
    except (TypeError, ValueError):
        raise ConfigError(f"{loc}{key}: expected {typ.__name__}, got {val!r}") from None
    return val


def _line_map(text):
    """Dotted key -> 1-based line number, from the YAML node tree."""
    out = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        at = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{at}invalid YAML: {getattr(e, 'problem', e)}") from None

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = prefix + str(k.value)
                out[key] = k.start_mark.line + 1
                walk(v, key + ".")
    if root is not None:
        walk(root, "")
    return out


def load_config(path=None):
    text = DEFAULT_CONFIG if path is None else Path(path).read_text()
    lines = _line_map(text)
    return RunConfig.from_dict(yaml.safe_load(text), lines)


# ---------------------------------------------------------------------------
# provenance


def artifact_version():
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else __version__


def _stamp(cfg):
    return {"config_hash": cfg.hash(), "version": artifact_version()}


def write_manifest(out, command, cfg, timings, outputs, extra=None):
    m = {"command": command, **_stamp(cfg), "config": cfg.to_dict(),
         "versions": {"python": platform.python_version(), "numpy": np.__version__,
                      "scipy": scipy.__version__, "pyyaml": yaml.__version__,
                      "click": metadata.version("click")},
         "timings_s": timings, "outputs": outputs}
    m.update(extra or {})
    p = Path(out) / f"manifest_{command}.json"
    p.write_text(json.dumps(m, indent=2, default=float))
    return p


def _write_csv(path, cfg, header, rows):
    s = _stamp(cfg)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={s['config_hash']} version={s['version']}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def _write_json(path, cfg, payload):
    d = {**_stamp(cfg), **payload}
    Path(path).write_text(json.dumps(d, indent=2, default=float))


# ---------------------------------------------------------------------------
# branch storage


def save_branch(path, cfg, waves):
    arrs = {"config_hash": np.array(cfg.hash()), "version": np.array(artifact_version())}
    for i, w in enumerate(waves):
        u = w.unknowns
        arrs[f"eta_t_{i}"] = u.eta_t
        arrs[f"psi_t_{i}"] = u.psi_t
        arrs[f"scalars_{i}"] = np.array([w.params.epsilon, w.params.c_t, u.a, u.rho, w.residual_norm])
    arrs["count"] = np.array(len(waves))
    np.savez(path, **arrs)


def load_branch(path, cfg):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"branch file {path} not found (run 'solve' first)")
    z = np.load(path)
    grid = cfg.make_grid()
    p0 = cfg.params()
    out = []
    for i in range(int(z["count"])):
        eps, ct, a, rho, res = z[f"scalars_{i}"]
        if len(z[f"eta_t_{i}"]) != grid.N:
            raise ConfigError(f"branch file grid N={len(z[f'eta_t_{i}'])} differs from config N={grid.N}")
        u = st.SteadyUnknowns(z[f"eta_t_{i}"], z[f"psi_t_{i}"], float(a), float(rho))
        p = st.SteadyParams(float(eps), float(ct), p0.gamma1, p0.gamma2, p0.b, p0.g)
        out.append(st.to_traveling_wave(u, p, grid, cfg.grid.M, float(res)))
    return out


def _pick(waves, index):
    try:
        return waves[index]
    except IndexError:
        raise ConfigError(f"branch point {index} out of range (branch has {len(waves)} points)") from None


# ---------------------------------------------------------------------------
# commands (callable without click)


def cmd_solve(cfg, out):
    t0 = time.perf_counter()
    sched = [(e, None) for e in cfg.eps_schedule()]
    grid = cfg.make_grid()
    gm = cfg.geometry
    waves = st.solve_branch(cfg.params(), (gm.a0, gm.rho0), sched, grid, cfg.grid.M, cfg.solver.tol)
    rows = []
    for w in waves:
        rows.append((w.params.epsilon, w.c, w.a, w.rho, w.residual_norm,
                     np.max(np.abs(w.state.surface.eta)),
                     dy.energy(w.state, cfg.g, cfg.b),
                     dy.momentum(w.state)))
    out = Path(out)
    _write_csv(out / "branch.csv", cfg, ["epsilon", "c", "a", "rho", "residual", "eta_inf", "E", "P"], rows)
    save_branch(out / "branch.npz", cfg, waves)
    write_manifest(out, "solve", cfg, {"total": time.perf_counter() - t0}, ["branch.csv", "branch.npz"])
    return waves


def cmd_spectrum(cfg, out, point=-1, branch=None):
    t0 = time.perf_counter()
    out = Path(out)
    waves = load_branch(branch or out / "branch.npz", cfg)
    w = _pick(waves, point)
    rep = sb.spectrum_report(w, g=cfg.g, b=cfg.b)
    payload = json.loads(rep.to_json())
    payload["point"] = point
    payload["epsilon"] = w.params.epsilon
    _write_json(out / "spectrum.json", cfg, payload)
    chi = rep.chi_c
    np.savez(out / "chi_c.npz", d_eta=chi.d_eta, d_phi=chi.d_phi, d_xbar=chi.d_xbar, d_ybar=chi.d_ybar,
             point=np.array(point), config_hash=np.array(cfg.hash()), version=np.array(artifact_version()))
    write_manifest(out, "spectrum", cfg, {"total": time.perf_counter() - t0}, ["spectrum.json", "chi_c.npz"])
    return rep


def cmd_moment(cfg, out):
    t0 = time.perf_counter()
    gm = cfg.geometry
    c0 = cfg.params().c_t
    br = sb.solve_c_branch(gm.a0, gm.rho0, cfg.strengths.gamma1, cfg.epsilon, n=cfg.moment.n,
                           dct=cfg.moment.dct_frac * c0, grid=cfg.make_grid(), order=cfg.grid.M,
                           tol=cfg.moment.tol)
    r = sb.moment_of_instability(br, geometry=(gm.a0, gm.rho0), g=cfg.g, b=cfg.b)
    payload = json.loads(r.to_json())
    payload["dp_identity_error"] = r.dp_identity_error()
    payload["dpp_rel_error_closed_form"] = abs(r.dpp_fd - r.dpp_closed_form) / abs(r.dpp_closed_form)
    out = Path(out)
    _write_json(out / "moment.json", cfg, payload)
    write_manifest(out, "moment", cfg, {"total": time.perf_counter() - t0}, ["moment.json"])
    return r


def cmd_evolve(cfg, out, branch=None):
    t0 = time.perf_counter()
    out = Path(out)
    w = _pick(load_branch(branch or out / "branch.npz", cfg), cfg.evolve.point)
    e = cfg.evolve
    tr = dy.evolve(w.state, e.dt, e.T, cfg.g, cfg.b, form=e.form, stride=e.stride)
    tr.to_csv(out / "trajectory.csv")
    # prepend the provenance line
    body = (out / "trajectory.csv").read_text()
    s = _stamp(cfg)
    (out / "trajectory.csv").write_text(f"# config_hash={s['config_hash']} version={s['version']}\n" + body)
    dE, dP = tr.drift()
    ref = dy.translate(w.state, w.c * tr.t[-1])
    dev = float(np.max(np.abs(tr.final.as_vector() - ref.as_vector())))
    payload = {"energy_drift": dE, "momentum_drift": dP, "translate_deviation": dev,
               "breach": None if tr.breach is None else asdict(tr.breach), "steps": int(round(e.T / e.dt))}
    _write_json(out / "evolve.json", cfg, payload)
    write_manifest(out, "evolve", cfg, {"total": time.perf_counter() - t0}, ["trajectory.csv", "evolve.json"])
    return payload


class _ChiReport:
    def __init__(self, chi_c):
        self.chi_c = chi_c


def cmd_perturb(cfg, out, branch=None):
    t0 = time.perf_counter()
    out = Path(out)
    ex = cfg.experiment
    report, point = None, cfg.evolve.point
    if ex.direction == "chi_c":
        path = out / "chi_c.npz"
        if not path.exists():
            raise FileNotFoundError(f"{path} not found (run 'spectrum' first)")
        z = np.load(path)
        point = int(z["point"])
        report = _ChiReport(dy.TangentVector(z["d_eta"], z["d_phi"], z["d_xbar"], z["d_ybar"]))
    w = _pick(load_branch(branch or out / "branch.npz", cfg), point)
    g = sb.instability_experiment(w, ex.direction, ex.amplitude, T=ex.T, dt=ex.dt, samples=ex.samples,
                                  report=report, g=cfg.g, b=cfg.b, seed=cfg.seed, order=ex.order,
                                  form=ex.form)
    _write_json(out / "growth.json", cfg, json.loads(g.to_json()))
    _write_csv(out / "growth.csv", cfg, ["t", "distance"], zip(g.t, g.distance))
    write_manifest(out, "perturb", cfg, {"total": time.perf_counter() - t0}, ["growth.json", "growth.csv"])
    return g


def selftest():
    """Fast invariant checks; returns a list of (name, ok, detail)."""
    res = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as e:  # report, do not abort the suite
            ok, detail = False, f"{type(e).__name__}: {e}"
        res.append((name, bool(ok), detail))

    def compat():
        r = st.compatibility_gamma2(2.0, 1.0, 1.0)
        return abs(r - 9 / 7) < 1e-14, f"gamma2/gamma1 = {r!r}"

    def det_t():
        _, d, dc = st.matrix_T(2.0, 1.0, 1.0, 9 / 7)
        return abs(d - dc) < 1e-12 * abs(dc) and d < 0, f"det T = {d:.6e}"

    def a_eigs():
        M, _, eig = sb.matrix_A_small(2.0, 1.0, 1.0, 9 / 7, 1.0)
        num = np.sort(np.linalg.eigvalsh(4 * np.pi * M))
        err = np.max(np.abs(num - np.sort(eig)))
        return err < 1e-12, f"max eigenvalue error {err:.1e}"

    def dno_flat():
        from .surface import SurfaceState, dno_apply
        grid = Grid(20.0, 128)
        f = np.cos(3 * np.pi / 20.0 * grid.nodes)
        r = dno_apply(SurfaceState(np.zeros(grid.N), f, grid), f)
        err = np.max(np.abs(r - 3 * np.pi / 20.0 * f))
        return err < 1e-13, f"G(0) multiplier error {err:.1e}"

    def skew():
        from .potentials import DipoleConfig
        from .surface import SurfaceState, project
        grid = Grid(20.0, 128)
        x = grid.nodes
        u = dy.FullState(SurfaceState(0.02 * np.exp(-x**2), project(0.02 * x * np.exp(-x**2)), grid),
                         DipoleConfig((0.0, -1.0), (0.0, -3.0), 1.0, 9 / 7, 0.1))
        rng = np.random.default_rng(0)
        ws = [dy.CotangentVector(rng.normal(size=grid.N), project(rng.normal(size=grid.N)),
                                 rng.normal(size=2), rng.normal(size=2)) for _ in range(2)]

        def pair(a, b):
            return grid.h * (a.d_eta @ b.d_eta + a.d_phi @ b.d_phi) + a.d_xbar @ b.d_xbar + a.d_ybar @ b.d_ybar
        a = pair(ws[0], dy.poisson_apply(u, ws[1]))
        b = pair(ws[1], dy.poisson_apply(u, ws[0]))
        return abs(a + b) < 1e-10 * max(abs(a), 1.0), f"skew defect {abs(a + b):.1e}"

    def dpp_sign():
        return sb.dpp_closed_form(2.0, 1.0, 1.0, 9 / 7) < 0, f"d'' = {sb.dpp_closed_form(2.0, 1.0, 1.0, 9 / 7):.4f}"

    for name, fn in (("compatibility ratio", compat), ("det T closed form", det_t),
                     ("A eigenvalues", a_eigs), ("flat DNO multiplier", dno_flat),
                     ("Poisson map skew symmetry", skew), ("d'' sign", dpp_sign)):
        check(name, fn)
    return res


# ---------------------------------------------------------------------------
# click front end

_CONFIG_ERRORS = (ConfigError, DegenerateGeometry, CompatibilityViolated, OSError, ValueError)


def _run(ctx, fn):
    """Run fn with thread limits; map errors to exit codes."""
    from threadpoolctl import threadpool_limits
    verbose = ctx.obj.get("verbose", False)
    try:
        cfg = load_config(ctx.obj["config"])
        if ctx.obj.get("threads"):
            cfg.threads = ctx.obj["threads"]
        out = Path(ctx.obj["out"])
        out.mkdir(parents=True, exist_ok=True)
        with threadpool_limits(limits=cfg.threads):
            result = fn(cfg, out)
    except AmbiguousSignature as e:
        click.echo(f"AmbiguousSignature: {e} (eigenvalues: {list(map(float, e.eigenvalues))})", err=True)
        ctx.exit(3)
    except _CONFIG_ERRORS as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        ctx.exit(2)
    except DipoleWaveError as e:
        click.echo(f"{type(e).__name__}: {e}", err=True)
        ctx.exit(3)
    if verbose and result is not None:
        click.echo(result if isinstance(result, str) else json.dumps(result, default=float, indent=2)
                   if isinstance(result, dict) else repr(result)[:2000])
    return result


@click.group()
@click.option("--config", "config", type=click.Path(), default=None, help="YAML run configuration.")
@click.option("--out", "out", type=click.Path(), default=".", show_default=True, help="Output directory.")
@click.option("--threads", type=int, default=None, help="BLAS/FFT thread limit (overrides config).")
@click.option("--verbose", is_flag=True, help="Echo results.")
@click.pass_context
def main(ctx, config, out, threads, verbose):
    """Finite-dipole water waves: traveling-wave branches and their stability."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, out=out, threads=threads, verbose=verbose)


@main.command()
@click.pass_context
def solve(ctx):
    """Continue the traveling-wave branch in eps; write branch.csv/npz."""
    waves = _run(ctx, cmd_solve)
    click.echo(f"solved {len(waves)} branch points; max residual {max(w.residual_norm for w in waves):.2e}")


@main.command()
@click.option("--point", type=int, default=-1, show_default=True, help="Branch index.")
@click.option("--branch", type=click.Path(), default=None, help="Branch NPZ (default OUT/branch.npz).")
@click.pass_context
def spectrum(ctx, point, branch):
    """Signature of the discretized I^-1 H_c at a branch point."""
    rep = _run(ctx, lambda cfg, out: cmd_spectrum(cfg, out, point, branch))
    click.echo(f"negatives={rep.negatives} near_zeros={rep.near_zeros} mu_c^2={rep.mu_c_sq:.6e}")


@main.command()
@click.pass_context
def moment(ctx):
    """Moment of instability d(c) by branch differences in c."""
    r = _run(ctx, cmd_moment)
    click.echo(f"d''_fd={r.dpp_fd:.6f} closed_form={r.dpp_closed_form:.6f} d'+P rel={r.dp_identity_error():.2e}")


@main.command()
@click.option("--branch", type=click.Path(), default=None)
@click.pass_context
def evolve(ctx, branch):
    """Evolve a branch point; write trajectory.csv and drift diagnostics."""
    p = _run(ctx, lambda cfg, out: cmd_evolve(cfg, out, branch))
    click.echo(f"energy drift {p['energy_drift']:.2e}, momentum drift {p['momentum_drift']:.2e}")


@main.command()
@click.option("--branch", type=click.Path(), default=None)
@click.pass_context
def perturb(ctx, branch):
    """Perturb a traveling wave and record the orbital distance."""
    g = _run(ctx, lambda cfg, out: cmd_perturb(cfg, out, branch))
    click.echo(f"growth factor {g.growth_factor:.3f}, e-fold time {g.efold_time:.3g}")


@main.command("selftest")
@click.pass_context
def selftest_cmd(ctx):
    """Quick invariant checks (PASS/FAIL per line)."""
    res = selftest()
    for name, ok, detail in res:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    ctx.exit(0 if all(ok for _, ok, _ in res) else 3)


@main.command("show-config")
def show_config():
    """Print the default configuration."""
    click.echo(DEFAULT_CONFIG, nl=False)


if __name__ == "__main__":
    sys.exit(main())
