"""Command-line front end.

Every subcommand accepts ``--config run.json``; explicit flags override the
file. Exit codes: 0 success, 1 numerical failure, 2 configuration error. On
failure a JSON object ``{"error", "message", "exit_code"}`` goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import estimators, fitness, funcfit, linkperf, moments, sampleio
from .heavytail_dist import MixtureParams
from .stochastic_net import (
    ChannelParams,
    ConfigError,
    NetworkConfig,
    SectoredAntenna,
    sample_correlation_coefficient,
    sample_interference_power_limited,
    sample_interference_power_rich,
)

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "channel": {"alpha": 3.0, "beta_db": -72.3, "sigma_sf_db": 0.0},
    "network": {
        "lambda1": None,
        "eta": 1.0,
        "r_cell": 150.0,
        "p_tx_dbm": 30.0,
        "r_max": None,
        "n_bs": 1,
        "n_ue": 1,
    },
    "antenna": {"gain_main": 10.0, "gain_back": 0.1, "beamwidth": math.pi / 6, "n_clusters": 1},
    "estimator": {"delta": 1e-6, "max_iter": 500, "w1_init": None},
    "link": {"distance": 145.0, "noise_dbm_hz": -124.0, "target_rate": 1.0, "combining": "IU"},
    "seed": 0,
    "n": 100000,
    "workers": None,
}

# flag name -> (section, key)
FLAG_MAP = {
    "alpha": ("channel", "alpha"),
    "beta_db": ("channel", "beta_db"),
    "sigma_sf": ("channel", "sigma_sf_db"),
    "lambda1": ("network", "lambda1"),
    "eta": ("network", "eta"),
    "r_cell": ("network", "r_cell"),
    "p_dbm": ("network", "p_tx_dbm"),
    "r_max": ("network", "r_max"),
    "n_bs": ("network", "n_bs"),
    "n_ue": ("network", "n_ue"),
    "gain_main": ("antenna", "gain_main"),
    "gain_back": ("antenna", "gain_back"),
    "beamwidth": ("antenna", "beamwidth"),
    "clusters": ("antenna", "n_clusters"),
    "delta": ("estimator", "delta"),
    "max_iter": ("estimator", "max_iter"),
    "w1_init": ("estimator", "w1_init"),
    "distance": ("link", "distance"),
    "noise_dbm_hz": ("link", "noise_dbm_hz"),
    "target_rate": ("link", "target_rate"),
    "combining": ("link", "combining"),
    "seed": (None, "seed"),
    "n": (None, "n"),
    "workers": (None, "workers"),
}


@dataclass
class RunConfig:
    channel: dict = field(default_factory=lambda: dict(DEFAULTS["channel"]))
    network: dict = field(default_factory=lambda: dict(DEFAULTS["network"]))
    antenna: dict = field(default_factory=lambda: dict(DEFAULTS["antenna"]))
    estimator: dict = field(default_factory=lambda: dict(DEFAULTS["estimator"]))
    link: dict = field(default_factory=lambda: dict(DEFAULTS["link"]))
    seed: int = 0
    n: int = 100000
    workers: int | None = None

    @classmethod
    def from_sources(cls, config_path, args) -> "RunConfig":
        cfg = cls()
        if config_path:
            try:
                data = json.loads(Path(config_path).read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            cfg._merge(data)
        for flag, (section, key) in FLAG_MAP.items():
            value = getattr(args, flag, None)
            if value is None:
                continue
            if section is None:
                setattr(cfg, key, value)
            else:
                getattr(cfg, section)[key] = value
        return cfg

    def _merge(self, data: dict):
        unknown = set(data) - {"channel", "network", "antenna", "estimator", "link", "seed", "n", "workers"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        for section in ("channel", "network", "antenna", "estimator", "link"):
            block = data.get(section, {})
            target = getattr(self, section)
            bad = set(block) - set(target)
            if bad:
                raise ConfigError(f"unknown keys in {section}: {sorted(bad)}")
            target.update(block)
        for key in ("seed", "n", "workers"):
            if key in data:
                setattr(self, key, data[key])

    def channel_params(self) -> ChannelParams:
        return ChannelParams(**{k: float(v) for k, v in self.channel.items()})

    def network_config(self) -> NetworkConfig:
        net = dict(self.network)
        lambda1 = net.pop("lambda1")
        kw = {
            "p_tx_dbm": float(net["p_tx_dbm"]),
            "r_max": None if net["r_max"] is None else float(net["r_max"]),
            "n_bs": int(net["n_bs"]),
            "n_ue": int(net["n_ue"]),
        }
        if lambda1 is None:
            return NetworkConfig.from_cell_radius(float(net["r_cell"]), float(net["eta"]), **kw)
        return NetworkConfig(float(lambda1), float(net["eta"]), None, **kw)

    def antenna_config(self) -> SectoredAntenna:
        a = self.antenna
        return SectoredAntenna(float(a["gain_main"]), float(a["gain_back"]), float(a["beamwidth"]), int(a["n_clusters"]))

    def em_config(self) -> estimators.EMConfig:
        e = self.estimator
        init = None if e["w1_init"] is None else (float(e["w1_init"]), None, None)
        return estimators.EMConfig(delta=float(e["delta"]), max_iter=int(e["max_iter"]), init=init)

    def to_dict(self) -> dict:
        # worker count never changes results, so it stays out of artifacts
        d = asdict(self)
        d.pop("workers")
        return d


# --------------------------------------------------------------------------
# helpers


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_fit(path) -> estimators.FitReport:
    try:
        return estimators.FitReport.from_dict(json.loads(Path(path).read_text()))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path} is not a fit report: {exc}") from exc


def _check_n(cfg):
    if int(cfg.n) != cfg.n or cfg.n < 1:
        raise ConfigError("n must be an integer >= 1")
    return int(cfg.n)


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, cfg: RunConfig):
    ch, net = cfg.channel_params(), cfg.network_config()
    n = _check_n(cfg)
    if args.kind == "rich":
        s = sample_interference_power_rich(ch, net, n, cfg.seed, cfg.workers)
    elif args.kind == "limited":
        s = sample_interference_power_limited(ch, net, cfg.antenna_config(), n, cfg.seed, cfg.workers)
    else:
        s = sample_correlation_coefficient(
            ch, net, n, cfg.seed, workers=cfg.workers, normalization=args.normalization
        )
    s.meta["run_config"] = cfg.to_dict()
    if args.output is None:
        raise ConfigError("simulate needs -o/--output (.json or .bin)")
    sampleio.save_samples(s, args.output)
    summary = {"output": str(args.output), "kind": s.kind, "n": len(s), "mean": float(np.mean(s.values))}
    sys.stdout.write(sampleio.dumps_json(summary))


def cmd_moments(args, cfg: RunConfig):
    ch, net = cfg.channel_params(), cfg.network_config()
    out = {"config": cfg.to_dict()}
    try:
        m = moments.analytic_moments(ch, net)
        out["analytic"] = {"mean": m.mean, "variance": m.variance}
        out["offdiag_second_moment"] = moments.offdiag_moments(ch, net)[1]
        out["corr_coeff_variance"] = moments.corr_coeff_variance(ch, net)
    except moments.DivergentMoment as exc:
        out["analytic"] = {"error": str(exc)}
    if ch.alpha > 2 or net.r_max is not None:
        t = moments.truncated_moments(ch, net)
        out["truncated"] = {"mean": t.mean, "variance": t.variance}
    if args.numeric:
        nm = moments.numeric_moments(ch, net, _check_n(cfg), cfg.seed, cfg.workers, args.method)
        out["numeric"] = {"mean": nm.mean, "variance": nm.variance, "method": args.method, "n": cfg.n}
    _emit(sampleio.dumps_json(out), args.output)


def cmd_fit(args, cfg: RunConfig):
    s = sampleio.load_samples(args.samples)
    mom = None
    method = args.method.replace("-", "_")
    if method in ("ig_mm", "iw_mm") and args.moments == "truncated":
        meta = s.meta.get("run_config")
        if not meta:
            raise ConfigError("truncated moments need a sample file written by `simulate`")
        src = RunConfig()
        src._merge(meta)
        mom = moments.truncated_moments(src.channel_params(), src.network_config())
    report = estimators.fit(s, method, cfg.em_config(), mom)
    if args.score:
        report.kl = fitness.kl_divergence(s, report.logpdf)
    report.notes["source"] = str(args.samples)
    report.notes["estimator"] = cfg.to_dict()["estimator"]
    _emit(report.to_json() + "\n", args.output)
    if report.method == "mixture_em" and not report.converged:
        raise estimators.EstimationError(f"EM did not converge within {report.iterations} iterations")


def cmd_kl(args, cfg: RunConfig):
    s = sampleio.load_samples(args.samples)
    report = _load_fit(args.fit)
    score = fitness.kl_score(s, report.logpdf)
    out = {"kl": score.value, "raw": score.raw, "n": score.n, "bandwidth": score.bandwidth, "method": report.method}
    _emit(sampleio.dumps_json(out), args.output)


def _read_grid(path):
    text = Path(path).read_text()
    if path.endswith(".json"):
        return [tuple(p) for p in json.loads(text)]
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    try:
        return [(float(a), float(b)) for a, b, *_ in rows]
    except ValueError:
        return [(float(a), float(b)) for a, b, *_ in rows[1:]]


def cmd_funcfit(args, cfg: RunConfig):
    grid = _read_grid(args.grid)
    if args.variable == "sigma":
        pc = funcfit.fit_sigma_polynomial(grid, args.target)
    else:
        pc = funcfit.fit_alpha_polynomial(grid, args.target)
    x = np.array([g[0] for g in grid])
    theta = np.array([g[1] for g in grid])
    fitted = pc.polynomial(x)
    resid = fitted - (np.log10(theta) if pc.log10 else theta)
    out = {"coeffs": pc.to_dict(), "max_abs_residual": float(np.max(np.abs(resid)))}
    _emit(sampleio.dumps_json(out), args.output)


def cmd_lookup(args, cfg: RunConfig):
    p_dbm = cfg.network["p_tx_dbm"]
    sigma = cfg.channel["sigma_sf_db"]
    p = funcfit.table1_lookup(cfg.channel["alpha"], sigma, p_dbm, interpolate=args.interpolate)
    out = {"alpha": cfg.channel["alpha"], "sigma_sf_db": sigma, "p_tx_dbm": p_dbm, "params": p.as_dict()}
    _emit(sampleio.dumps_json(out), args.output)


def _link(args, cfg: RunConfig):
    model = None
    if args.model:
        model = _load_fit(args.model).params
    elif args.table:
        model = funcfit.table1_lookup(cfg.channel["alpha"], cfg.channel["sigma_sf_db"], cfg.network["p_tx_dbm"])
    lk = cfg.link
    return linkperf.LinkConfig(
        distance=float(lk["distance"]),
        noise_dbm_hz=float(lk["noise_dbm_hz"]),
        target_rate=float(lk["target_rate"]),
        combining=lk["combining"],
        source="model" if model is not None else "simulated",
        model=model,
        diag_only_ia=bool(args.diag_only_ia),
    )


def _rate_cdf(args, cfg):
    link = _link(args, cfg)
    ant = cfg.antenna_config() if link.combining == "limited" else None
    return linkperf.rate_cdf(link, cfg.channel_params(), cfg.network_config(), _check_n(cfg), cfg.seed, ant, cfg.workers)


def cmd_rate_cdf(args, cfg: RunConfig):
    _emit(_rate_cdf(args, cfg).to_csv(args.max_rows), args.output)


def _read_rate_csv(path) -> linkperf.RateCdf:
    rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    rates = [float(r[0]) for r in rows[1:] if r]
    return linkperf.RateCdf.from_samples(rates)


def cmd_outage(args, cfg: RunConfig):
    cdf = _read_rate_csv(args.cdf) if args.cdf else _rate_cdf(args, cfg)
    targets = args.targets or [float(cfg.link["target_rate"])]
    lines = ["target_rate,outage"] + [f"{t!r},{linkperf.outage(cdf, t)!r}" for t in targets]
    _emit("\n".join(lines) + "\n", args.output)


def cmd_lemma1(args, cfg: RunConfig):
    ch, net = cfg.channel_params(), cfg.network_config()
    res = linkperf.lemma1_check(
        ch, net, _check_n(cfg), cfg.seed, combiner="interference" if args.negative_control else "channel",
        workers=cfg.workers,
    )
    out = {"config": cfg.to_dict(), "n_bs": net.n_bs, "n": cfg.n, "ks": res.ks, "critical_1pct": res.critical, "passed": res.passed}
    _emit(sampleio.dumps_json(out), args.output)


def cmd_reproduce(args, cfg: RunConfig):
    from . import experiments

    summary = experiments.reproduce(Path(args.outdir), quick=args.quick, seed=cfg.seed, workers=cfg.workers)
    sys.stdout.write(sampleio.dumps_json(summary))


# --------------------------------------------------------------------------
# parser


def _common(p, sim=True):
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("-o", "--output", help="output file (stdout when omitted, where allowed)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    if not sim:
        return
    g = p.add_argument_group("channel / network")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta-db", dest="beta_db", type=float)
    g.add_argument("--sigma-sf", dest="sigma_sf", type=float, help="shadowing std-dev in dB")
    g.add_argument("--lambda1", type=float, help="base UE intensity per m^2 (default: from --r-cell)")
    g.add_argument("--eta", type=float)
    g.add_argument("--r-cell", dest="r_cell", type=float)
    g.add_argument("--p-dbm", dest="p_dbm", type=float)
    g.add_argument("--r-max", dest="r_max", type=float)
    g.add_argument("--n-bs", dest="n_bs", type=int)
    g.add_argument("--n-ue", dest="n_ue", type=int)
    g.add_argument("--n", type=int, help="number of realizations")


def _antenna(p):
    g = p.add_argument_group("sectored antenna")
    g.add_argument("--gain-main", dest="gain_main", type=float)
    g.add_argument("--gain-back", dest="gain_back", type=float)
    g.add_argument("--beamwidth", type=float, help="main-lobe width in radians")
    g.add_argument("--clusters", type=int)


def _link_flags(p):
    g = p.add_argument_group("link")
    g.add_argument("--distance", type=float)
    g.add_argument("--noise-dbm-hz", dest="noise_dbm_hz", type=float)
    g.add_argument("--combining", choices=linkperf.COMBINING)
    g.add_argument("--model", help="fit report JSON; draws interference from the fitted model")
    g.add_argument("--table", action="store_true", help="draw interference from the coefficient table")
    g.add_argument("--diag-only-ia", dest="diag_only_ia", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cellinterf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw interference samples")
    _common(p)
    _antenna(p)
    p.add_argument("--kind", choices=("rich", "limited", "corr"), default="rich")
    p.add_argument("--normalization", choices=("mean", "sample"), default="mean")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="analytic, truncated and Monte-Carlo moments")
    _common(p)
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--method", choices=("sample", "conditional"), default="conditional")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fit", help="fit a model to a sample file")
    _common(p, sim=False)
    p.add_argument("samples")
    p.add_argument("--method", required=True, choices=("ig-mm", "iw-mm", "ig-mle", "iw-mle", "mixture"))
    p.add_argument("--moments", choices=("sample", "truncated"), default="sample")
    p.add_argument("--delta", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--w1-init", dest="w1_init", type=float)
    p.add_argument("--score", action="store_true", help="also store the KL score in the report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("kl", help="KL divergence of a fit against samples")
    _common(p, sim=False)
    p.add_argument("samples")
    p.add_argument("fit")
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("funcfit", help="fit a polynomial parameter law")
    _common(p, sim=False)
    p.add_argument("grid", help="CSV or JSON of (x, theta) pairs")
    p.add_argument("--variable", choices=("sigma", "alpha"), default="sigma")
    p.add_argument("--target", choices=funcfit.TARGETS, default="w1")
    p.set_defaults(func=cmd_funcfit)

    p = sub.add_parser("lookup", help="mixture parameters from the coefficient table")
    _common(p, sim=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--sigma-sf", dest="sigma_sf", type=float)
    p.add_argument("--p-dbm", dest="p_dbm", type=float)
    p.add_argument("--interpolate", action="store_true")
    p.set_defaults(func=cmd_lookup)

    p = sub.add_parser("rate-cdf", help="rate CDF as CSV")
    _common(p)
    _antenna(p)
    _link_flags(p)
    p.add_argument("--max-rows", dest="max_rows", type=int, default=None)
    p.set_defaults(func=cmd_rate_cdf)

    p = sub.add_parser("outage", help="outage probability at target rates")
    _common(p)
    _antenna(p)
    _link_flags(p)
    p.add_argument("--cdf", help="rate CSV from `rate-cdf` instead of simulating")
    p.add_argument("--target-rate", dest="targets", type=float, nargs="+")
    p.set_defaults(func=cmd_outage)

    p = sub.add_parser("lemma1", help="post-combining vs per-antenna interference KS test")
    _common(p)
    p.add_argument("--negative-control", action="store_true")
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("reproduce", help="run the experiment grid end to end")
    _common(p, sim=False)
    p.add_argument("--outdir", default="reproduce_out")
    p.add_argument("--quick", action="store_true", help="reduced sample sizes")
    p.set_defaults(func=cmd_reproduce)
    return parser


def _fail(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    state = getattr(exc, "state", None)
    if state:
        payload["state"] = {k: (v if isinstance(v, (int, float, str, type(None))) else repr(v)) for k, v in state.items()}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = RunConfig.from_sources(getattr(args, "config", None), args)
        args.func(args, cfg)
    except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(exc, EXIT_CONFIG)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
