"""Command-line experiment driver.

Every subcommand writes its artifacts plus ``manifest.json`` (resolved
configuration with the source of each value, git describe string and a
timestamp) into ``--out``. Artifacts are deterministic for fixed flags and
seed; the timestamp lives only in the manifest.

Exit codes: 0 success, 2 data or domain error, 64 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import basis as B
from .basis import BasisKind
from .dynamics import (
    ObservationSpec,
    OdeSystem,
    Trajectory,
    add_noise,
    build_hankel,
    cycle_gap,
    integrate_rk4,
    observe,
    svd_embed,
)
from .embedding import SincPeConfig, embed_coordinates
from .errors import NonFiniteState, SincInrError, UnsupportedKind
from .network import TrainConfig, fit_shift_network, init_network, save_checkpoint, train
from .signals import (
    ImageGray,
    Signal1D,
    encode_pgm,
    gen_bandlimited,
    image_to_dataset,
    load_pgm,
    psnr,
    synthetic_image,
    write_atomic,
    write_rows_csv,
    write_table_csv,
)
from .sindy import CentralDifference, InrJacobian, LibrarySpec, Spectral, sindy_pipeline

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64

DEFAULT_X0 = {
    "lorenz": [1.0, 1.0, 1.0],
    "vanderpol": [2.0, 0.0],
    "chen": [1.0, 1.0, 1.0],
    "rossler": [1.0, 1.0, 1.0],
    "duffing": [0.1, 0.0, 0.0],
    "rank14lorenz": [0.1] * 14,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# --- option plumbing -----------------------------------------------------------------
# Options default to SUPPRESS so that an absent flag can fall back to the config
# file and then to the registered default (flag > config file > default).


class _Options:
    def __init__(self, parser):
        self.parser = parser
        self.defaults = {}

    def add(self, *flags, dest, default=None, help="", **kw):
        self.defaults[dest] = default
        shown = "" if default is None else f" (default: {_show(default)})"
        self.parser.add_argument(*flags, dest=dest, default=argparse.SUPPRESS, help=help + shown, **kw)


def _show(value):
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def _resolve(args, defaults):
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(config) - set(defaults))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    given = vars(args)
    values, sources = {}, {}
    for key, default in defaults.items():
        if key in given:
            values[key], sources[key] = given[key], "flag"
        elif key in config:
            values[key], sources[key] = config[key], "config"
        else:
            values[key], sources[key] = default, "default"
    return values, sources


def _common(opts, out_default):
    opts.add("--out", dest="out", default=out_default, help="output directory")
    opts.add("--seed", dest="seed", type=int, default=0, help="random seed")
    opts.parser.add_argument("--config", help="JSON file of option values; flags take precedence")


def _kind_options(opts, prefix="", default="sinc"):
    opts.add(
        f"--{prefix}kind" if prefix else "--kind",
        dest=f"{prefix}kind",
        choices=B.KINDS,
        default=default,
        help="basis / activation family",
    )
    opts.add(
        f"--{prefix}param",
        dest=f"{prefix}params",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="family parameter, repeatable: sinc bandwidth; gaussian s (length); "
        "sine omega (rad per unit); gabor sigma, omega0; hermite max_degree",
    )
    opts.add(
        f"--{prefix}normalized",
        dest=f"{prefix}normalized",
        choices=("yes", "no"),
        help="unit-integral scaling (default: family default)",
    )


def _parse_params(items):
    out = {}
    for item in items:
        name, sep, value = str(item).partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not NAME=VALUE")
        out[name.strip().replace("-", "_")] = float(value) if name.strip() != "max_degree" else int(value)
    return out


def _make_kind(name, params, normalized):
    factory = getattr(BasisKind, name)
    kwargs = _parse_params(params)
    if normalized is not None and name not in (B.SINE, B.RELU):
        kwargs["normalized"] = normalized == "yes"
    try:
        return factory(**kwargs)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {name}: {exc}") from exc


def _floats(text, what):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"{what}: expected comma-separated numbers") from exc


# --- output helpers ------------------------------------------------------------------


def _git_describe():
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return res.stdout.strip() or "unknown"


def _clean(value):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_json(path, data):
    write_atomic(path, json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")


class _Run:
    def __init__(self, command, values, sources):
        self.command = command
        self.values = values
        self.sources = sources
        self.out = Path(values["out"])
        self.outputs = []

    def path(self, name):
        self.outputs.append(name)
        return self.out / name

    def json(self, name, data):
        _write_json(self.path(name), data)

    def table(self, stem, header, columns, emit="csv"):
        if emit == "json":
            data = {h: np.asarray(c, dtype=float).tolist() for h, c in zip(header, columns)}
            self.json(f"{stem}.json", data)
        else:
            write_table_csv(self.path(f"{stem}.csv"), header, columns)

    def manifest(self, status):
        _write_json(
            self.out / "manifest.json",
            {
                "command": self.command,
                "config": {k: {"value": self.values[k], "source": self.sources[k]} for k in sorted(self.values)},
                "gitDescribe": _git_describe(),
                "outputs": self.outputs,
                "status": status,
                "createdAt": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            },
        )


# --- subcommands ---------------------------------------------------------------------


def cmd_basis_check(run, v):
    name = v["kind"]
    if name is None:
        raise UsageError("a basis kind is required (positional or --kind)")
    kind = _make_kind(name, v["params"], v["normalized"])
    diag = B.diagnose(kind, grid_size=int(v["grid_size"]), truncation_k=v["K"])
    report = {"basis": kind.to_dict(), **diag.to_dict()}
    if name in B.RIESZ_VIOLATION:
        report["riesz"] = "unsupported"
        report["violatedCondition"] = B.RIESZ_VIOLATION[name]
    else:
        report["riesz"] = "supported" if diag.riesz_lower > 0 else "degenerate"
    run.json("diagnostics.json", report)
    if name in B.RIESZ_VIOLATION:
        raise UnsupportedKind(f"{name}: {B.RIESZ_VIOLATION[name]}")
    print(json.dumps(_clean(report), sort_keys=True))


def _test_signal(v):
    step = float(v["step"])
    if v["signal"] == "bump":
        x = np.arange(-v["extent"], v["extent"], step)
        return Signal1D(x, np.exp(-(x**2) / (2 * v["width"] ** 2)))
    _, evaluate = gen_bandlimited(v["max_freq"], int(v["terms"]), seed=v["seed"])
    hi = (int(v["terms"]) + 1) / (2 * v["max_freq"])
    x = np.arange(-v["extent"], hi + v["extent"], step)
    return Signal1D(x, evaluate(x))


def cmd_approx(run, v):
    omegas = _floats(v["omegas"], "omegas")
    if not omegas:
        raise UsageError("at least one omega is required")
    kind = _make_kind(v["kind"], v["params"], v["normalized"])
    if v["analysis"] == "sinc":
        analysis = B.AnalysisFunction(BasisKind.sinc())
    else:
        analysis = B.AnalysisFunction(BasisKind.gaussian(v["analysis_s"], normalized=True))
    sig = _test_signal(v)
    norm = B.l2_norm(sig)
    rows = []
    for om in omegas:
        recon, coeffs = B.reconstruct_signal(kind, sig, om, analysis)
        err = B.approximation_error(sig, recon)
        rows.append((om, len(coeffs), err, err / norm))
    cols = [list(c) for c in zip(*rows)]
    run.table("approx", ["omega", "numCoefficients", "l2Error", "relativeL2Error"], cols, v["emit"])
    for om, _, _, rel in rows:
        print(f"omega={om:g} relative L2 error={rel:.6g}")


def _train_common(opts, shape, omega, epochs, batch):
    _kind_options(opts, default="sinc")
    opts.add("--shape", dest="shape", default=shape, help="comma-separated layer widths, input first")
    opts.add("--omega", dest="omega", type=float, default=omega, help="activation scale (input units)")
    opts.add("--epochs", dest="epochs", type=int, default=epochs, help="passes over the data")
    opts.add("--lr", dest="lr", type=float, default=1e-3, help="learning rate")
    opts.add("--batch-size", dest="batch_size", type=int, default=batch, help="samples per step")
    opts.add("--optimizer", dest="optimizer", choices=("adam", "gd"), default="adam", help="update rule")


def _shape(text):
    try:
        return [int(s) for s in str(text).split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --shape {text!r}") from exc


def _train_config(v):
    return TrainConfig(
        learning_rate=v["lr"],
        epochs=int(v["epochs"]),
        batch_size=int(v["batch_size"]),
        seed=int(v["seed"]),
        optimizer=v["optimizer"],
    )


def fit_signal(v):
    """Train a coordinate network on a band-limited signal; return (net, x, y, report)."""
    grid = np.linspace(0.0, (int(v["terms"]) + 1) / (2 * v["max_freq"]), int(v["samples"]))
    sig, _ = gen_bandlimited(v["max_freq"], int(v["terms"]), seed=int(v["seed"]), grid=grid)
    y = (sig.values - sig.values.min()) / np.ptp(sig.values)
    x = 2.0 * (grid - grid[0]) / (grid[-1] - grid[0]) - 1.0
    kind = _make_kind(v["kind"], v["params"], v["normalized"])
    shape = _shape(v["shape"])
    if shape[0] != 1 or shape[-1] != 1:
        raise UsageError("signal networks map 1 input to 1 output")
    net = init_network(shape, kind, v["omega"], seed=int(v["seed"]))
    report = train(net, x[:, None], y[:, None], _train_config(v))
    return net, x, y, report


def cmd_train_signal(run, v):
    net, x, y, report = fit_signal(v)
    pred = net(x[:, None])[:, 0]
    save_checkpoint(net, run.path("checkpoint.bin"), seed=int(v["seed"]))
    epochs = np.arange(1, len(report.loss_history) + 1)
    run.table("log", ["epoch", "loss", "psnr"], [epochs, report.loss_history, report.psnr_history], v["emit"])
    run.table("reconstruction", ["x", "target", "prediction"], [x, y, pred], v["emit"])
    final = psnr(y, pred)
    run.json("report.json", {"finalLoss": report.final_loss, "psnr": final})
    print(f"final PSNR {final:.3f} dB")


def _image_dataset(image, centers):
    coords, targets = image_to_dataset(image)
    if centers:
        coords = embed_coordinates(coords, SincPeConfig(int(centers)))
    return coords, targets


def fit_image(image, v, fraction=1.0, activation=None, omega=None, lr=None):
    """Train on a seeded pixel subset; PSNR is measured on every pixel."""
    vals = dict(v)
    if activation is not None:
        vals["kind"], vals["params"], vals["normalized"] = activation, [], None
    if omega is not None:
        vals["omega"] = omega
    if lr is not None:
        vals["lr"] = lr
    coords, targets = _image_dataset(image, vals["pe_centers"])
    shape = _shape(vals["shape"])
    shape[0] = coords.shape[1]
    kind = _make_kind(vals["kind"], vals["params"], vals["normalized"])
    net = init_network(shape, kind, vals["omega"], seed=int(vals["seed"]))
    rng = np.random.default_rng(int(vals["seed"]))
    count = max(1, int(round(fraction * coords.shape[0])))
    idx = np.sort(rng.permutation(coords.shape[0])[:count])
    report = train(net, coords[idx], targets[idx], _train_config(vals))
    pred = net(coords)
    return net, report, pred, psnr(targets, pred)


def _load_image(v):
    if v["image"]:
        return load_pgm(v["image"])
    return synthetic_image(int(v["size"]), seed=int(v["seed"]))


def cmd_train_image(run, v):
    image = _load_image(v)
    net, report, pred, score = fit_image(image, v, fraction=float(v["fraction"]))
    save_checkpoint(net, run.path("checkpoint.bin"), seed=int(v["seed"]))
    epochs = np.arange(1, len(report.loss_history) + 1)
    run.table("log", ["epoch", "loss", "psnr"], [epochs, report.loss_history, report.psnr_history], v["emit"])
    recon = ImageGray(pred.reshape(image.height, image.width))
    write_atomic(run.path("reconstruction.pgm"), encode_pgm(recon))
    run.json("report.json", {"psnr": score, "finalLoss": report.final_loss, "peCenters": v["pe_centers"]})
    print(f"PSNR over all pixels {score:.3f} dB")


def cmd_sweep(run, v):
    image = _load_image(v)
    rows = []
    for act in v["activations"]:
        if act not in B.KINDS:
            raise UsageError(f"unknown activation {act!r}")
        for om in _floats(v["omegas"], "omegas"):
            for lr in _floats(v["lrs"], "lrs"):
                for frac in _floats(v["fractions"], "fractions"):
                    if not 0 < frac <= 1:
                        raise UsageError("fractions must lie in (0, 1]")
                    _, _, _, score = fit_image(image, v, frac, act, om, lr)
                    rows.append((act, om, lr, frac, score))
                    print(f"{act} omega={om:g} lr={lr:g} fraction={frac:g}: {score:.3f} dB")
    if v["emit"] == "json":
        run.json("sweep.json", [dict(zip(("activation", "omega", "lr", "fraction", "psnr"), r)) for r in rows])
    else:
        write_rows_csv(run.path("sweep.csv"), ["activation", "omega", "lr", "fraction", "psnr"], rows)


def _system_options(opts, system, dt, samples, burn_in=0.0):
    opts.add("--system", dest="system", choices=sorted(DEFAULT_X0), default=system, help="ODE preset")
    opts.add("--sys-param", dest="sys_params", action="append", default=[], metavar="NAME=VALUE",
             help="override a preset parameter, repeatable")  # fmt: skip
    group = opts.parser.add_mutually_exclusive_group()
    group.add_argument("--standard-lorenz", dest="lorenz_form", action="store_const", const="standard",
                       default=argparse.SUPPRESS, help="Lorenz dz/dt = xy - beta z (default)")  # fmt: skip
    group.add_argument("--appendix-lorenz", dest="lorenz_form", action="store_const", const="appendix",
                       default=argparse.SUPPRESS, help="Lorenz dz/dt = -xy - beta z, sign-flipped variant that diverges")  # fmt: skip
    opts.defaults["lorenz_form"] = "standard"
    opts.add("--x0", dest="x0", help="comma-separated initial state (default: preset-specific)")
    opts.add("--t0", dest="t0", type=float, default=0.0, help="start time (time units)")
    opts.add("--burn-in", dest="burn_in", type=float, default=burn_in,
             help="integrate this long from --x0 and discard it before sampling (time units)")  # fmt: skip
    opts.add("--dt", dest="dt", type=float, default=dt, help="sampling step (time units)")
    opts.add("--samples", dest="samples", type=int, default=samples, help="number of output samples")
    opts.add("--substeps", dest="substeps", type=int, default=10, help="RK4 steps per sample")
    opts.add("--noise", dest="noise", choices=("none", "gaussian", "uniform"), default="gaussian",
             help="additive noise law, applied when --noise-level is positive")  # fmt: skip
    opts.add("--noise-level", dest="noise_level", type=float, default=0.0,
             help="gaussian std or uniform half-width n of U(-n, n) (state units)")  # fmt: skip


def _system(v):
    overrides = _parse_params(v["sys_params"])
    if v["system"] == "lorenz":
        overrides["standard"] = v["lorenz_form"] == "standard"
    try:
        return OdeSystem.by_name(v["system"], **overrides)
    except TypeError as exc:
        raise UsageError(f"bad preset parameters: {exc}") from exc


def _noise(v):
    if v["noise"] == "none" or not v["noise_level"]:
        return None
    return (v["noise"], float(v["noise_level"]))


def _simulate(v):
    system = _system(v)
    x0 = _floats(v["x0"], "x0") if v["x0"] is not None else DEFAULT_X0[v["system"]]
    if len(x0) != system.dimension:
        raise UsageError(f"--x0 needs {system.dimension} values")
    if int(v["samples"]) < 2:
        raise UsageError("--samples must be at least 2")
    if v["burn_in"] < 0:
        raise UsageError("--burn-in must be non-negative")
    if v["burn_in"] > 0:
        burn = integrate_rk4(system, x0, 0.0, v["burn_in"], v["dt"], int(v["substeps"]))
        x0 = burn.states[-1]
    t1 = v["t0"] + (int(v["samples"]) - 1) * v["dt"]
    return integrate_rk4(system, x0, v["t0"], t1, v["dt"], int(v["substeps"]))


def cmd_dynamics(run, v):
    try:
        traj = _simulate(v)
    except NonFiniteState as exc:
        if exc.partial is not None:
            exc.partial.to_csv(run.path("trajectory.partial.csv"))
        raise
    traj.to_csv(run.path("trajectory.csv"))
    noise = _noise(v)
    if v["observe"] is not None:
        obs = observe(traj, ObservationSpec(int(v["observe"]), noise, int(v["seed"])))
        obs.to_csv(run.path("observation.csv"))
    elif noise is not None:
        add_noise(traj, noise, int(v["seed"])).to_csv(run.path("noisy.csv"))
    print(f"wrote {len(traj)} samples of {v['system']}")


def _load_series(v):
    if v["input"]:
        data = np.loadtxt(v["input"], delimiter=",", skiprows=1, ndmin=2)
        col = int(v["column"])
        if not 1 <= col < data.shape[1]:
            raise UsageError(f"--column must be in 1..{data.shape[1] - 1}")
        t, y = data[:, 0], data[:, col]
        if v["noise"] != "none" and v["noise_level"]:
            from .dynamics import noise_samples

            y = y + noise_samples(_noise(v), y.size, int(v["seed"]))
        return t, y
    traj = _simulate(v)
    obs = observe(traj, ObservationSpec(int(v["observe"]), _noise(v), int(v["seed"])))
    return obs.grid, obs.values


def delay_series(t, y, denoise_omega=None, tau=None):
    """Optionally resample through a least-squares sinc network, then subsample by ``tau``."""
    if denoise_omega:
        net = fit_shift_network(t, y, BasisKind.sinc(), float(denoise_omega))
        y = net(t[:, None])[:, 0]
    if tau:
        dt = float(t[1] - t[0])
        stride = max(1, int(round(tau / dt)))
        t, y = t[::stride], y[::stride]
    return t, y


def cmd_hankel(run, v):
    t, y = _load_series(v)
    t, y = delay_series(t, y, v["denoise_omega"], v["tau"])
    m = int(v["m"])
    H = build_hankel(y, m, None if v["n"] is None else int(v["n"]))
    emb = svd_embed(H, int(v["rank"]))
    emb.write_csv(run.path("singular_values.csv"), run.path("surrogate.csv"))
    sv = emb.singular_values
    r = emb.rank
    energy = float(np.sum(sv[:r] ** 2) / np.sum(sv**2)) if sv[0] > 0 else 1.0
    try:
        gap = cycle_gap(emb.surrogate)
    except ValueError:
        gap = None
    report = {
        "m": H.shape[0],
        "n": H.shape[1],
        "rank": r,
        "sigmaRatio": float(sv[1] / sv[0]) if sv.size > 1 and sv[0] > 0 else 0.0,
        "energyCaptured": energy,
        "cycleGap": gap,
    }
    run.json("report.json", report)
    print(json.dumps(_clean(report), sort_keys=True))


def cmd_sindy(run, v):
    if v["input"]:
        data = np.loadtxt(v["input"], delimiter=",", skiprows=1, ndmin=2)
        clean = Trajectory(data[:, 0], data[:, 1:])
        names = None
    else:
        clean = _simulate(v)
        names = ["x", "y", "z"] if clean.dimension == 3 else None
    noise = _noise(v)
    traj = clean if noise is None else add_noise(clean, noise, int(v["seed"]))
    method = {
        "central": CentralDifference(),
        "spectral": Spectral(),
        "inr": InrJacobian(omega=float(v["omega"])),
    }[v["method"]]
    spec = LibrarySpec(int(v["degree"]), bool(v["trig"]), not v["no_constant"])
    model, score = sindy_pipeline(
        traj,
        method,
        spec,
        lam=float(v["lam"]),
        threshold=float(v["threshold"]),
        reference=clean,
        horizon=float(v["horizon"]),
        max_iters=int(v["max_iters"]),
        substeps=int(v["substeps"]),
        refine=bool(v["refine"]),
    )
    model.to_json(run.path("model.json"))
    lines = model.equations(names)
    write_atomic(run.path("equations.txt"), "\n".join(lines) + "\n")
    run.json("report.json", {"psnr": score, "method": v["method"], "activeTerms": int(model.active_mask.sum())})
    print("\n".join(lines))
    print(f"reconstruction PSNR over t in [t0, t0 + {v['horizon']:g}]: {score:.3f} dB")


# --- parser ------------------------------------------------------------------------------

COMMANDS = {}


def build_parser():
    parser = _Parser(prog="sincinr", description="Sinc coordinate-network experiments.")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def sub(name, func, help):
        p = subs.add_parser(name, help=help, description=help)
        opts = _Options(p)
        COMMANDS[name] = (func, opts)
        _common(opts, f"runs/{name}")
        return opts

    o = sub("basis-check", cmd_basis_check, "Riesz and partition-of-unity diagnostics for a basis family.")
    o.parser.add_argument("kind_pos", nargs="?", choices=B.KINDS, metavar="KIND", help="basis family")
    _kind_options(o, default=None)
    o.add("--K", "-K", dest="K", type=int, help="shift truncation |k| <= K (default: 10000 for sinc, else 50)")
    o.add("--grid-size", dest="grid_size", type=int, default=101, help="points in [0, 1) for the PUC sum")

    o = sub("approx", cmd_approx, "Scaled shift-space approximation error versus omega.")
    _kind_options(o, default="sinc")
    o.add("--omegas", dest="omegas", nargs="+", type=float, default=[0.4, 0.2, 0.1, 0.05],
          help="scales (length units)")  # fmt: skip
    o.add("--signal", dest="signal", choices=("bump", "bandlimited"), default="bump", help="test signal")
    o.add("--width", dest="width", type=float, default=0.5, help="bump standard deviation (length)")
    o.add("--max-freq", dest="max_freq", type=float, default=4.0, help="band limit (cycles per length)")
    o.add("--terms", dest="terms", type=int, default=8, help="Nyquist terms in the band-limited signal")
    o.add("--extent", dest="extent", type=float, default=6.0, help="half-width of the sampling window (length)")
    o.add("--step", dest="step", type=float, default=0.002, help="sampling step (length)")
    o.add("--analysis", dest="analysis", choices=("gaussian", "sinc"), default="gaussian",
          help="analysis function")  # fmt: skip
    o.add("--analysis-s", dest="analysis_s", type=float, default=1.0, help="Gaussian analysis width (length)")
    o.add("--emit", dest="emit", choices=("csv", "json"), default="csv", help="table format")

    o = sub("train-signal", cmd_train_signal, "Fit a coordinate network to a band-limited 1-D signal.")
    _train_common(o, "1,64,64,1", 0.2, 2000, 256)
    o.add("--max-freq", dest="max_freq", type=float, default=4.0, help="band limit (cycles per unit)")
    o.add("--terms", dest="terms", type=int, default=8, help="Nyquist terms in the signal")
    o.add("--samples", dest="samples", type=int, default=256, help="training samples")
    o.add("--emit", dest="emit", choices=("csv", "json"), default="csv", help="table format")

    def image_opts(o):
        o.add("--image", dest="image", help="binary PGM (P5) input (default: synthetic test image)")
        o.add("--size", dest="size", type=int, default=32, help="synthetic image side (pixels)")
        o.add("--pe-centers", dest="pe_centers", type=int, default=0,
              help="sinc positional-embedding centres per axis (0 = raw coordinates)")  # fmt: skip
        o.add("--emit", dest="emit", choices=("csv", "json"), default="csv", help="table format")

    o = sub("train-image", cmd_train_image, "Fit a coordinate network to a grayscale image.")
    _train_common(o, "2,64,64,1", 0.1, 200, 1024)
    image_opts(o)
    o.add("--fraction", dest="fraction", type=float, default=1.0, help="share of pixels used for training")

    o = sub("sweep", cmd_sweep, "Grid search over activation, omega, learning rate and sampling rate.")
    _train_common(o, "2,64,64,1", 0.1, 100, 1024)
    image_opts(o)
    o.add("--activations", dest="activations", nargs="+", default=["sinc", "gaussian", "relu"],
          help="activation families")  # fmt: skip
    o.add("--omegas", dest="omegas", nargs="+", type=float, default=[0.05, 0.1], help="activation scales")
    o.add("--lrs", dest="lrs", nargs="+", type=float, default=[1e-3], help="learning rates")
    o.add("--fractions", dest="fractions", nargs="+", type=float, default=[0.25, 0.5, 0.75, 1.0],
          help="shares of pixels used for training")  # fmt: skip

    o = sub("dynamics", cmd_dynamics, "Integrate an ODE preset and write the trajectory.")
    _system_options(o, "lorenz", 0.02, 5000)
    o.add("--observe", dest="observe", type=int, help="also write one noisy observed coordinate")

    o = sub("hankel", cmd_hankel, "Hankel delay embedding and its SVD surrogate attractor.")
    _system_options(o, "vanderpol", 0.02, 5000, burn_in=50.0)
    o.add("--input", dest="input", help="CSV with time in column 0 (default: simulate --system)")
    o.add("--column", dest="column", type=int, default=1, help="CSV column holding the series")
    o.add("--observe", dest="observe", type=int, default=0, help="observed coordinate when simulating")
    o.add("--m", dest="m", type=int, default=100, help="Hankel rows (delays)")
    o.add("--n", dest="n", type=int, help="Hankel columns (default: all remaining samples)")
    o.add("--tau", dest="tau", type=float, help="delay step (time units); subsamples the series")
    o.add("--rank", dest="rank", type=int, default=2, help="retained singular triplets")
    o.add("--denoise-omega", dest="denoise_omega", type=float,
          help="resample through a least-squares sinc network with this scale (time units)")  # fmt: skip

    o = sub("sindy", cmd_sindy, "Sparse identification of governing equations.")
    _system_options(o, "lorenz", 0.1, 1000)
    o.add("--input", dest="input", help="trajectory CSV t,x0,x1,... (default: simulate --system)")
    o.add("--method", dest="method", choices=("central", "spectral", "inr"), default="central",
          help="derivative estimator")  # fmt: skip
    o.add("--omega", dest="omega", type=float, default=0.3, help="sinc network scale for --method inr (time)")
    o.add("--degree", dest="degree", type=int, default=2, help="polynomial library degree")
    o.add("--trig", dest="trig", action="store_true", default=False, help="add sin, cos and sin*cos terms")
    o.add("--no-constant", dest="no_constant", action="store_true", default=False, help="drop the constant")
    o.add("--lam", dest="lam", type=float, default=1e-6, help="ridge weight")
    o.add("--threshold", dest="threshold", type=float, default=0.1, help="sparsity threshold")
    o.add("--max-iters", dest="max_iters", type=int, default=20, help="thresholding rounds")
    o.add("--horizon", dest="horizon", type=float, default=10.0, help="scoring window (time units)")
    o.add("--refine", dest="refine", action=argparse.BooleanOptionalAction, default=True,
          help="sharpen the fit by matching one-step RK4 predictions")  # fmt: skip
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("sincinr: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    func, opts = COMMANDS[args.command]
    if getattr(args, "kind_pos", None) is not None:
        if hasattr(args, "kind"):
            parser.error("give the basis kind once")
        args.kind = args.kind_pos
    try:
        values, sources = _resolve(args, opts.defaults)
    except UsageError as exc:
        print(f"sincinr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run = _Run(args.command, values, sources)
    try:
        func(run, values)
    except UsageError as exc:
        print(f"sincinr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SincInrError, ValueError, OSError) as exc:
        print(f"sincinr {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        run.manifest("error")
        return EXIT_DOMAIN
    run.manifest("ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
