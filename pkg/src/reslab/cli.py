"""Command line front end: ``reslab <subcommand> [options]``.

Every subcommand writes CSV (floats with 17 significant digits) to stdout
or ``--output``. Exit codes: 0 ok, 2 configuration error, 3 numerical
failure, 4 verification failure. Errors are reported on stderr as one line
``error <code> <message>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import mpmath
import numpy as np

from . import oracle, pole, spectral
from .config import RunConfig, normalize_key, read_config
from .errors import ConfigError, NotApplicable, ReslabError
from .potential import make_double_well
from .resonance import find_resonances, gamow_from_resonance, smooth_truncate, truncate
from .scattering import solve_scattering, transmission_reflection
from .units import UnitScheme

U234_GAMMA_SI = 1.3361e-13
U234_HBAR_Z_SI = (1.0967e-19, -8.5951e-55)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


class VerificationFailure(ReslabError):
    module = "cli"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def fmt(value, digits: int = 17) -> str:
    """Fixed-width scientific notation with ``digits`` significant digits."""
    if isinstance(value, (mpmath.mpf,)):
        return mpmath.nstr(value, digits, min_fixed=1, max_fixed=0, strip_zeros=False)
    return f"{float(value):.{digits - 1}e}"


def _write_csv(args, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating, mpmath.mpf)) else v for v in row])
    text = buf.getvalue()
    if args.output and args.output != "-":
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _times(args):
    if args.times:
        try:
            t = [float(s) for s in args.times.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"--times {args.times!r} is not a list of numbers") from None
    else:
        if args.tmin is None or args.tmax is None:
            return None
        t = np.linspace(args.tmin, args.tmax, args.nt).tolist()
    if not t or any(not math.isfinite(x) or x < 0 for x in t):
        raise ConfigError("times must be finite and non-negative")
    return t


# ---------------------------------------------------------------- subcommands

def _pick_resonance(cfg: RunConfig, args, digits=None):
    if args.max_im <= 0 or not 0 < args.kmin < args.kmax:
        raise ConfigError("need 0 < kmin < kmax and max_im > 0")
    rs = find_resonances(cfg.potential, (args.kmin, args.kmax), args.max_im,
                         digits=digits if digits is not None else cfg.digits)
    if len(rs) <= args.index:
        raise NotApplicable(f"no resonance #{args.index} in k-window [{args.kmin}, {args.kmax}]")
    return rs[args.index]


def _require_double(r):
    if r.half_width < 1e-10 * r.z_complex.real:
        raise NotApplicable("resonance too narrow for time evolution in double precision "
                            f"(|Im z| / Re z = {r.half_width / r.z_complex.real:.2e})")


def cmd_scatter(cfg, args):
    k = np.linspace(args.kmin, args.kmax, args.nk)
    if np.any(k <= 0):
        raise ConfigError("scatter needs kmin > 0")
    rows = []
    if cfg.digits:
        for kk in k:
            sol = solve_scattering(cfg.potential, float(kk), int(cfg.digits))
            T, R, _ = transmission_reflection(sol)
            a, b = complex(sol.a), complex(sol.b_plus)
            rows.append((float(kk), a.real, a.imag, b.real, b.imag, T, R))
    else:
        sol = solve_scattering(cfg.potential, k)
        T, R, _ = transmission_reflection(sol)
        for i, kk in enumerate(k):
            a, b = complex(sol.a[i]), complex(sol.b_plus[i])
            rows.append((float(kk), a.real, a.imag, b.real, b.imag, float(T[i]), float(R[i])))
    _write_csv(args, ["k", "re_a", "im_a", "re_b_plus", "im_b_plus", "T", "R_plus"], rows)


def cmd_resonances(cfg, args):
    digits = cfg.digits if cfg.digits is not None else "auto"
    rs = find_resonances(cfg.potential, (args.kmin, args.kmax), args.max_im, digits=digits,
                         verify=args.verify)
    rows = []
    for r in rs:
        z = r.z_complex
        rows.append((z.real, z.imag, r.E, r.Gamma, cfg.units.to_si_rate(r.Gamma), r.channel))
    _write_csv(args, ["re_z", "im_z", "E", "Gamma", "Gamma_SI", "channel"], rows)


def cmd_gamow(cfg, args):
    r = _pick_resonance(cfg, args, "auto" if cfg.digits is None else cfg.digits)
    G = gamow_from_resonance(cfg.potential, r)
    L = cfg.potential.L
    xmin = -1.5 * L if args.xmin is None else args.xmin
    xmax = 1.5 * L if args.xmax is None else args.xmax
    x = np.linspace(xmin, xmax, args.nx)
    g = G(x)
    _write_csv(args, ["x", "re_G", "im_G", "abs_G"],
               [(float(xi), gi.real, gi.imag, abs(gi)) for xi, gi in zip(x, g)])


def cmd_transform(cfg, args):
    r = _pick_resonance(cfg, args, "auto" if cfg.digits is None else cfg.digits)
    G = gamow_from_resonance(cfg.potential, r)
    d = max(r.digits or 30, 30)
    with mpmath.workdps(d):
        zr = mpmath.mpf(mpmath.re(mpmath.mpc(r.z)))
        w = -mpmath.im(mpmath.mpc(r.z))
        ks = [zr + mpmath.mpf(s) * w for s in np.linspace(-args.half_widths, args.half_widths, args.nk)]
        closed = cfg.potential.kind == "doublewell" and r.channel in ("even", "odd")
        rows = []
        eta = pole.pole_prediction(G, ks)
        for k, e in zip(ks, eta):
            if closed:
                val = pole.gamow_transform_closed_form(G, k, d)
            else:
                val = pole.gamow_transform_numeric(G, k, digits=d)
            rows.append((mpmath.nstr(k, max(17, d), strip_zeros=False), float(abs(val)), float(e)))
    _write_csv(args, ["k", "abs_psihat_plus", "abs_eta"], rows)


def _initial_state(cfg, args, r):
    G = gamow_from_resonance(cfg.potential, r)
    half = cfg.potential.inner_half_width or cfg.potential.L
    if args.state == "gamow":
        psi = truncate(G, half).function
    else:
        psi = smooth_truncate(G, half)
    return G, psi.normalized()


def _dynamics_setup(cfg, args):
    r = _pick_resonance(cfg, args, None)
    _require_double(r)
    G, psi = _initial_state(cfg, args, r)
    tol = args.tol if args.tol is not None else (1e-3 if args.state == "gamow" else 1e-6)
    coeffs = spectral.forward_transform(psi, cfg.potential, resonances=[r], tol=tol,
                                        threads=args.threads, window=args.window)
    t = _times(args)
    if t is None:
        lo, hi = spectral.exponential_window(r.E, r.Gamma)
        t = np.linspace(lo, hi, args.nt).tolist()
    return r, G, psi, coeffs, t


def cmd_evolve(cfg, args):
    r, G, psi, coeffs, t = _dynamics_setup(cfg, args)
    W = args.window or cfg.potential.L
    x = np.linspace(-W, W, args.nx)
    res = spectral.evolve(coeffs, t_list=t, x_window=W, x_grid=x)
    rows = []
    for ti, prof in zip(res.times, res.profiles):
        for xi, v in zip(x, prof):
            rows.append((float(ti), float(xi), v.real, v.imag, abs(v) ** 2))
    _write_csv(args, ["t", "x", "re_psi", "im_psi", "abs2"], rows)


def cmd_survival(cfg, args):
    r, G, psi, coeffs, t = _dynamics_setup(cfg, args)
    W = args.window or cfg.potential.L
    res = spectral.evolve(coeffs, t_list=t, x_window=W)
    P = spectral.survival_probability(res)
    lo, _ = spectral.exponential_window(r.E, r.Gamma)
    cal = pole.calibrate_pole(coeffs, G, lo, W)
    amps = [a for _, a in pole.pole_approximation_evolution(r, cal.tilde_f_at_roots, t, cal.c)]
    xs, ws = spectral._window_nodes(cfg.potential, max(abs(psi.x0), abs(psi.x_end)))
    overlap = complex(np.sum(ws * np.conj(psi(xs)) * G(xs)))
    rows = [(ti, p, m, abs(a * overlap) ** 2 / coeffs.norm2 ** 2)
            for (ti, p), m, a in zip(P, res.window_mass, amps)]
    _write_csv(args, ["t", "P", "window_mass", "pole_P"], rows)


def cmd_oracle_compare(cfg, args):
    r, G, psi, coeffs, t = _dynamics_setup(cfg, args)
    V = cfg.potential
    W = args.window or V.L
    x = np.linspace(-W, W, 2001)
    res = spectral.evolve(coeffs, t_list=t, x_window=W, x_grid=x)
    h = args.h
    dt = args.dt
    probe = oracle.GridWave.from_callable(psi, 4 * V.L + 20, h, dt)
    K = oracle.effective_wavenumber(probe)
    B = args.box if args.box else oracle.required_box(W, K, max(t))
    g0 = oracle.GridWave.from_callable(psi, B, h, dt)
    snaps = oracle.propagate_crank_nicolson(g0, V, t, window=W, K=K)
    rows = [(c.t, c.l2_diff, int(c.flag)) for c in oracle.compare(res, snaps, W)]
    _write_csv(args, ["t", "l2_diff", "flag"], rows)


def u234_report(digits: int = 50, units: UnitScheme | None = None) -> dict:
    units = units or UnitScheme()
    V = make_double_well(1.0, 2.0, 436.0)
    rs = find_resonances(V, (7.0, 8.0), 1e-3, digits=digits)
    if not rs:
        raise VerificationFailure("no resonance found in [7, 8]")
    r = rs[0]
    z = r.z_complex
    hz = units.momentum_si(z)
    gsi = units.to_si_rate(r.Gamma)
    return dict(resonance=r, z=z, hbar_z_si=hz, Gamma=r.Gamma, Gamma_SI=gsi,
                rel_dev_Gamma=abs(gsi - U234_GAMMA_SI) / U234_GAMMA_SI,
                rel_dev_re=abs(hz.real - U234_HBAR_Z_SI[0]) / U234_HBAR_Z_SI[0],
                rel_dev_im=abs(hz.imag - U234_HBAR_Z_SI[1]) / abs(U234_HBAR_Z_SI[1]))


def cmd_u234(cfg, args):
    digits = cfg.digits if isinstance(cfg.digits, int) else 50
    rep = u234_report(digits, cfg.units)
    z, hz = rep["z"], rep["hbar_z_si"]
    _write_csv(args, ["quantity", "value"], [
        ("re_z", z.real), ("im_z", z.imag),
        ("re_hbar_z_SI", hz.real), ("im_hbar_z_SI", hz.imag),
        ("Gamma", rep["Gamma"]), ("Gamma_SI", rep["Gamma_SI"]),
        ("Gamma_SI_reference", U234_GAMMA_SI), ("rel_dev_Gamma_SI", rep["rel_dev_Gamma"]),
    ])
    if rep["rel_dev_Gamma"] > 1e-3:
        raise VerificationFailure(f"Gamma_SI deviates by {rep['rel_dev_Gamma']:.3g} from the reference")


COMMANDS = {
    "scatter": (cmd_scatter, "a(k), b+(k), T and R on a real k-grid (generalised eigenfunctions with c = 1; transmission and reflection coefficients)."),
    "resonances": (cmd_resonances, "zeros z of a(k) below the real axis with E = Re z^2, Gamma = -Im z^2 and the decay rate in 1/s."),
    "gamow": (cmd_gamow, "the Gamow function of a resonance: purely outgoing tails, cos/sin inner form on the double well."),
    "transform": (cmd_transform, "Lorentzian peak of the transformed truncated Gamow function next to the pole prediction |c/(k - conj z)| (transform-versus-eta figure)."),
    "evolve": (cmd_evolve, "exact spectral time evolution e^{-iHt} psi of a truncated Gamow state on the observation window."),
    "survival": (cmd_survival, "survival probability |<psi, e^{-iHt} psi>|^2, window mass and the Breit-Wigner pole prediction."),
    "oracle-compare": (cmd_oracle_compare, "spectral evolution against an independent Crank-Nicolson propagation."),
    "u234": (cmd_u234, "the alpha-decay example: double well (1, 2, 436), its resonance and the decay rate in 1/s."),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("potential and units")
    g.add_argument("--config", help="key = value file; flags override its entries")
    g.add_argument("--potential", choices=["doublewell", "rect", "custom", "free"])
    g.add_argument("--ell", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--lambda", dest="lambda_", type=float)
    g.add_argument("--breakpoints")
    g.add_argument("--heights")
    g.add_argument("--a0-m", type=float)
    g.add_argument("--E1-MeV", dest="E1_MeV", type=float)
    g.add_argument("--mass-kg", type=float)
    g.add_argument("--digits", help="working digits (integer) or 'auto'; default double precision")
    g.add_argument("--threads", type=int, default=None,
                   help="worker threads for transforms (default $RESLAB_THREADS or 1)")
    g.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")

    win = _Parser(add_help=False)
    win.add_argument("--kmin", type=float, default=None)
    win.add_argument("--kmax", type=float, default=None)
    win.add_argument("--max-im", type=float, default=None)
    win.add_argument("--index", type=int, default=0, help="which resonance (by Re z) to use")

    dyn = _Parser(add_help=False)
    dyn.add_argument("--state", choices=["gamow", "smooth"], default="gamow",
                     help="1_ell G, or G with a smooth cut-off at ell")
    dyn.add_argument("--times", help="comma separated times")
    dyn.add_argument("--tmin", type=float)
    dyn.add_argument("--tmax", type=float)
    dyn.add_argument("--nt", type=int, default=20)
    dyn.add_argument("--window", type=float, help="observation half-width W (default L)")
    dyn.add_argument("--tol", type=float, help="Parseval tolerance of the transform")

    p = _Parser(prog="reslab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, text) in COMMANDS.items():
        parents = [common]
        if name not in ("scatter", "u234"):
            parents.append(win)
        if name in ("evolve", "survival", "oracle-compare"):
            parents.append(dyn)
        sp = sub.add_parser(name, parents=parents, help=text, description="Reproduces " + text)
        if name == "scatter":
            sp.add_argument("--kmin", type=float, default=None)
            sp.add_argument("--kmax", type=float, default=None)
            sp.add_argument("--nk", type=int, default=200)
        if name == "resonances":
            sp.add_argument("--verify", action="store_true", help="argument-principle check per root")
        if name == "gamow":
            sp.add_argument("--xmin", type=float)
            sp.add_argument("--xmax", type=float)
            sp.add_argument("--nx", type=int, default=401)
        if name == "transform":
            sp.add_argument("--half-widths", type=float, default=10.0)
            sp.add_argument("--nk", type=int, default=81)
        if name == "evolve":
            sp.add_argument("--nx", type=int, default=101)
        if name == "oracle-compare":
            sp.add_argument("--h", type=float, default=0.01)
            sp.add_argument("--dt", type=float, default=0.005)
            sp.add_argument("--box", type=float, help="box half-width B (default from the return-time bound)")
    return p


DEFAULTS = dict(kmin=0.1, kmax=10.0, max_im=1.0)
SCATTER_DEFAULTS = dict(kmin=0.1, kmax=30.0)


def _merge(args, file_cfg: dict) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if v is not None}
    if "lambda_" in given:
        given["lambda"] = given.pop("lambda_")
    merged = dict(file_cfg)
    merged.update({normalize_key(k): v for k, v in given.items()})
    # option defaults from the file for flags left unset
    for key, value in file_cfg.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    defaults = SCATTER_DEFAULTS if args.command == "scatter" else DEFAULTS
    for key, value in defaults.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    for key in ("kmin", "kmax", "max_im", "tmin", "tmax", "window", "tol", "h", "dt", "box",
                "xmin", "xmax", "half_widths"):
        if isinstance(getattr(args, key, None), str):
            try:
                setattr(args, key, float(getattr(args, key)))
            except ValueError:
                raise ConfigError(f"{key} = {getattr(args, key)!r} is not a number") from None
    for key in ("nk", "nx", "nt", "index", "threads"):
        if isinstance(getattr(args, key, None), str):
            try:
                setattr(args, key, int(getattr(args, key)))
            except ValueError:
                raise ConfigError(f"{key} = {getattr(args, key)!r} is not an integer") from None
    if getattr(args, "threads", None) is not None and args.threads < 1:
        raise ConfigError("threads must be >= 1")
    for key in ("nk", "nx", "nt"):
        if getattr(args, key, 2) < 2:
            raise ConfigError(f"{key} must be >= 2")
    return RunConfig.from_mapping(merged)


def run(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        file_cfg = read_config(args.config) if args.config else {}
        cfg = _merge(args, file_cfg)
        COMMANDS[args.command][0](cfg, args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error {exc.code} {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailure as exc:
        print(f"error {exc.code} {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ReslabError as exc:
        print(f"error {exc.code} {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error config.ValueError {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error numeric.{type(exc).__name__} {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
