"""Command-line surface: model pricing, backtests, and individual analyses.

Subcommands:

* ``price``    - evaluate the production-cost price for given inputs.
* ``backtest`` - full pipeline; writes report.txt, report.json, figure1.csv
  (date, ratio) and figure2.csv (date, market, model).
* ``regress``  - level and log-log regressions only.
* ``var``      - lag selection, VAR fit, and both Granger directions.
* ``ratio``    - ratio statistics and episode detection.
* ``fetch``    - download raw difficulty / market-price charts to the cache.

A ``key = value`` config file (``--config``) seeds any long-form option;
explicit flags win. Environment variables configure only the fetch cache
directory and base URL. Exit status is 0 iff the command succeeded; errors
print one ``error[<code>]: <message>`` line to stderr.

Display rounding: prices 2 decimals; R-squared, chi-square, and p-values 3
decimals. Structured (JSON) output always carries full precision.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .backtest import (
    BacktestConfig,
    BacktestReport,
    detect_episodes,
    episodes_to_dict,
    ratio_series,
    ratio_to_dict,
    regression_to_dict,
    run_backtest,
)
from .dataset import (
    build_backtest_series,
    bundled_data_path,
    load_efficiency_table,
    load_observations,
    load_reward_schedule,
    parse_efficiency_table,
    parse_observations,
    parse_reward_schedule,
)
from .econometrics import log_transform, ols_fit
from .errors import DomainError, MinecostError, ValidationError
from .fetch import CHART_KINDS, cache_file_for, fetch_remote_series
from .pricing import (
    DEFAULT_ELECTRICITY_USD_PER_KWH,
    CostParams,
    NetworkParams,
    model_price,
)

CONFIG_KEYS = (
    "observations",
    "efficiency",
    "rewards",
    "electricity_price",
    "lags",
    "max_p",
    "entry_k",
    "min_len",
    "out_dir",
    "format",
)


@dataclass
class RunConfig:
    """Resolved options for the dataset-consuming subcommands."""

    observations: Path | None = None
    efficiency: Path | None = None
    rewards: Path | None = None
    electricity_price: float = DEFAULT_ELECTRICITY_USD_PER_KWH
    lags: int | None = 2  # None (flag value "auto") selects by criteria
    max_p: int = 8
    entry_k: float = 2.0
    min_len: int = 2
    out_dir: Path = field(default_factory=lambda: Path("."))
    format: str = "table"
    include_timestamp: bool = True

    def validate(self) -> None:
        if self.electricity_price <= 0:
            raise DomainError("electricity_price must be positive")
        if self.lags is not None and self.lags < 1:
            raise DomainError("lags must be >= 1 or 'auto'")
        if self.max_p < 1:
            raise DomainError("max_p must be >= 1")
        if self.entry_k <= 0:
            raise DomainError("entry_k must be positive")
        if self.min_len < 1:
            raise DomainError("min_len must be >= 1")
        if self.format not in ("table", "json"):
            raise DomainError(f"unknown output format {self.format!r}")
        for name in ("observations", "efficiency", "rewards"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ValidationError(f"{name} file not found: {path}")


def parse_config_file(path) -> dict:
    """Read a ``key = value`` file; '#' starts a comment, blank lines skip."""
    values = {}
    text = Path(path).read_text()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValidationError(
                f"{path}:{line_no}: unknown config key {key!r}; "
                f"choose from {', '.join(CONFIG_KEYS)}"
            )
        values[key] = value.strip()
    return values


def _parse_lags(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise DomainError(f"lags must be an integer or 'auto', got {text!r}") from None


def build_run_config(args) -> RunConfig:
    """Merge config-file values and flags (flags win) into a RunConfig."""
    file_values = parse_config_file(args.config) if args.config else {}
    cfg = RunConfig()

    def resolve(key, flag_value, convert):
        if flag_value is not None:
            return convert(flag_value)
        if key in file_values:
            return convert(file_values[key])
        return getattr(cfg, key)

    cfg.observations = resolve("observations", args.observations, Path)
    cfg.efficiency = resolve("efficiency", args.efficiency, Path)
    cfg.rewards = resolve("rewards", args.rewards, Path)
    cfg.electricity_price = resolve("electricity_price", args.electricity, float)
    cfg.lags = resolve("lags", args.lags, _parse_lags)
    cfg.max_p = resolve("max_p", args.max_p, int)
    cfg.entry_k = resolve("entry_k", args.entry_k, float)
    cfg.min_len = resolve("min_len", args.min_len, int)
    cfg.format = resolve("format", args.format, str)
    if hasattr(args, "out_dir"):
        cfg.out_dir = resolve("out_dir", args.out_dir, Path)
    if getattr(args, "no_provenance_timestamps", False):
        cfg.include_timestamp = False
    cfg.validate()
    return cfg


def _load_dataset(cfg: RunConfig):
    input_files = {
        "observations": str(cfg.observations) if cfg.observations else "<bundled>",
        "efficiency": str(cfg.efficiency) if cfg.efficiency else "<bundled>",
        "rewards": str(cfg.rewards) if cfg.rewards else "<bundled>",
    }
    if cfg.observations is not None:
        records = load_observations(cfg.observations)
    else:
        with bundled_data_path("observations.csv").open() as fh:
            records = parse_observations(fh)
    if cfg.rewards is not None:
        schedule = load_reward_schedule(cfg.rewards)
    else:
        with bundled_data_path("rewards.csv").open() as fh:
            schedule = parse_reward_schedule(fh)
    if cfg.efficiency is not None:
        table = load_efficiency_table(cfg.efficiency)
    else:
        with bundled_data_path("efficiency.csv").open() as fh:
            table = parse_efficiency_table(fh)
    return records, schedule, table, input_files


def _run_report(cfg: RunConfig) -> BacktestReport:
    records, schedule, table, input_files = _load_dataset(cfg)
    backtest_config = BacktestConfig(
        electricity_price=cfg.electricity_price,
        lags=cfg.lags,
        max_p=cfg.max_p,
        entry_k=cfg.entry_k,
        min_len=cfg.min_len,
        include_timestamp=cfg.include_timestamp,
    )
    return run_backtest(
        records, schedule, table, backtest_config, input_files=input_files
    )


def _load_pair(cfg: RunConfig):
    """Paired series only, for the subcommands that skip the VAR stage."""
    records, schedule, table, _ = _load_dataset(cfg)
    return build_backtest_series(
        records, schedule, table, electricity_price=cfg.electricity_price
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _fmt_price(v: float) -> str:
    return f"{v:.2f}"


def _fmt3(v: float) -> str:
    return f"{v:.3f}"


def render_granger_table(report: BacktestReport) -> str:
    lines = [
        "Granger causality Wald tests",
        f"{'H0':<52}{'chi2':>10}{'df':>5}{'Prob>chi2':>12}",
    ]
    for g in report.granger_results:
        flag = " *" if g.p_value < 0.05 else ""
        lines.append(
            f"{g.null_hypothesis():<52}{_fmt3(g.chi2_stat):>10}{g.df:>5}"
            f"{_fmt3(g.p_value):>12}{flag}"
        )
    lines.append("(* significant at the 5% level; descriptive, see caveats)")
    return "\n".join(lines)


def render_report(report: BacktestReport) -> str:
    """Human-readable report table."""
    r = report.ratio_stats
    lines = []
    lines.append("Production-cost backtest report")
    lines.append("=" * 68)
    first, last = report.pair.dates[0], report.pair.dates[-1]
    lines.append(
        f"Observations: {len(report.pair)}  ({first.isoformat()} .. {last.isoformat()})"
    )
    lines.append("")
    lines.append("Market/model price ratio")
    lines.append(
        f"  mean {_fmt3(r.mean)}   sd {_fmt3(r.std)}   "
        f"min {_fmt3(r.min)}   max {_fmt3(r.max)}"
    )
    lines.append("")
    lines.append("Regressions (market on model)")
    lv, lg = report.level_fit, report.log_fit
    lines.append(
        f"  levels : slope {lv.slope:.4f} (se {lv.stderr_slope:.4f})  "
        f"intercept {lv.intercept:.4f}  R^2 {_fmt3(lv.r_squared)}"
    )
    lines.append(
        f"  logs   : slope {lg.slope:.4f} (se {lg.stderr_slope:.4f})  "
        f"intercept {lg.intercept:.4f}  R^2 {_fmt3(lg.r_squared)}"
    )
    lines.append("")
    sel = report.lag_selection
    lines.append(
        f"Lag selection (chosen p = {sel.chosen_p}"
        + (", no order passed whiteness)" if sel.all_failed_whiteness else ")")
    )
    lines.append(f"  {'p':>3}{'AIC':>12}{'BIC':>12}{'Q':>12}{'df':>5}{'p-val':>9}  white")
    for row in sel.rows:
        lines.append(
            f"  {row.p:>3}{row.aic:>12.4f}{row.bic:>12.4f}"
            f"{row.portmanteau_stat:>12.3f}{row.portmanteau_df:>5}"
            f"{row.portmanteau_pvalue:>9.3f}  {'yes' if row.passes_whiteness else 'no'}"
        )
    lines.append("")
    lines.append(
        f"VAR({report.var_model.lag_order}) on log prices, "
        f"{report.var_model.nobs} effective observations"
    )
    lines.append("")
    lines.append(render_granger_table(report))
    lines.append("")
    if report.episodes:
        lines.append("Bubble episodes (heuristic threshold rule)")
        for e in report.episodes:
            lines.append(
                f"  {e.start_date.isoformat()} .. {e.end_date.isoformat()}  "
                f"peak ratio {_fmt3(e.peak_ratio)} on {e.peak_date.isoformat()}"
            )
    else:
        lines.append("Bubble episodes: none detected")
    lines.append("")
    lines.append("Caveats")
    for caveat in report.caveats:
        lines.append(f"  - {caveat}")
    lines.append("")
    prov = report.provenance
    lines.append("Provenance")
    lines.append(f"  package version : {prov.get('package_version')}")
    for name, path in sorted(prov.get("input_files", {}).items()):
        lines.append(f"  {name:<16}: {path}")
    params = prov.get("parameters", {})
    lines.append(
        "  parameters      : "
        + ", ".join(f"{k}={params[k]}" for k in sorted(params))
    )
    if "generated_at" in prov:
        lines.append(f"  generated at    : {prov['generated_at']}")
    lines.append("")
    return "\n".join(lines)


def report_json(report: BacktestReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def figure1_csv(report: BacktestReport) -> str:
    lines = ["date,ratio"]
    for d, ratio in zip(report.ratio_stats.dates, report.ratio_stats.ratios):
        lines.append(f"{d.isoformat()},{float(ratio)!r}")
    return "\n".join(lines) + "\n"


def figure2_csv(report: BacktestReport) -> str:
    lines = ["date,market,model"]
    for d, market, model in zip(
        report.pair.dates, report.pair.market_prices, report.pair.model_prices
    ):
        lines.append(f"{d.isoformat()},{float(market)!r},{float(model)!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_price(args) -> int:
    cost = CostParams(
        electricity_price=args.electricity
        if args.electricity is not None
        else DEFAULT_ELECTRICITY_USD_PER_KWH,
        efficiency=args.efficiency,
    )
    net = NetworkParams(difficulty=args.difficulty, block_reward=args.reward)
    price = model_price(cost, net)
    if args.format == "json":
        print(json.dumps({"model_price_usd": price}, sort_keys=True))
    else:
        print(_fmt_price(price))
    return 0


def cmd_backtest(args) -> int:
    cfg = build_run_config(args)
    report = _run_report(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = {
        "report.txt": render_report(report),
        "report.json": report_json(report),
        "figure1.csv": figure1_csv(report),
        "figure2.csv": figure2_csv(report),
    }
    for name, text in artifacts.items():
        (out_dir / name).write_text(text)
    if cfg.format == "json":
        sys.stdout.write(artifacts["report.json"])
    else:
        sys.stdout.write(artifacts["report.txt"])
        print(f"Artifacts written to {out_dir}/: {', '.join(sorted(artifacts))}")
    return 0


def cmd_regress(args) -> int:
    cfg = build_run_config(args)
    pair = _load_pair(cfg)
    lv = ols_fit(pair.model_prices, pair.market_prices)
    lg = ols_fit(log_transform(pair.model_prices), log_transform(pair.market_prices))
    if cfg.format == "json":
        print(
            json.dumps(
                {
                    "level_regression": regression_to_dict(lv),
                    "log_regression": regression_to_dict(lg),
                },
                sort_keys=True,
                indent=2,
            )
        )
        return 0
    print(f"levels: slope {lv.slope:.6f}  intercept {lv.intercept:.6f}  "
          f"R^2 {_fmt3(lv.r_squared)}")
    print(f"logs  : slope {lg.slope:.6f}  intercept {lg.intercept:.6f}  "
          f"R^2 {_fmt3(lg.r_squared)}")
    return 0


def cmd_var(args) -> int:
    cfg = build_run_config(args)
    report = _run_report(cfg)
    if cfg.format == "json":
        payload = report.to_dict()
        print(
            json.dumps(
                {
                    "lag_selection": payload["lag_selection"],
                    "var": payload["var"],
                    "granger": payload["granger"],
                },
                sort_keys=True,
                indent=2,
            )
        )
        return 0
    sel = report.lag_selection
    print(f"chosen lag order: {sel.chosen_p}"
          + ("  (no order passed whiteness)" if sel.all_failed_whiteness else ""))
    for row in sel.rows:
        print(
            f"  p={row.p}  AIC {row.aic:.4f}  BIC {row.bic:.4f}  "
            f"whiteness p {row.portmanteau_pvalue:.3f} "
            f"({'pass' if row.passes_whiteness else 'fail'})"
        )
    print()
    print(render_granger_table(report))
    return 0


def cmd_ratio(args) -> int:
    cfg = build_run_config(args)
    pair = _load_pair(cfg)
    stats = ratio_series(pair)
    episodes = detect_episodes(stats, entry_k=cfg.entry_k, min_len=cfg.min_len)
    if cfg.format == "json":
        print(
            json.dumps(
                {"ratio": ratio_to_dict(stats), "episodes": episodes_to_dict(episodes)},
                sort_keys=True,
                indent=2,
            )
        )
        return 0
    print(f"ratio mean {_fmt3(stats.mean)}  sd {_fmt3(stats.std)}  "
          f"min {_fmt3(stats.min)}  max {_fmt3(stats.max)}  n {len(stats.ratios)}")
    if episodes:
        for e in episodes:
            print(
                f"episode {e.start_date.isoformat()} .. {e.end_date.isoformat()}  "
                f"peak {_fmt3(e.peak_ratio)} on {e.peak_date.isoformat()}"
            )
    else:
        print("no episodes detected")
    return 0


def cmd_fetch(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    for kind in kinds:
        fetch_remote_series(
            kind,
            base_url=args.base_url,
            cache_dir=args.cache_dir,
            timeout=args.timeout,
        )
        print(f"{kind}: cached at {cache_file_for(kind, args.cache_dir)}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_dataset_options(sub, with_outputs=False):
    sub.add_argument("--config", metavar="FILE", help="key = value options file")
    sub.add_argument("--observations", metavar="PATH",
                     help="observations CSV (default: bundled dataset)")
    sub.add_argument("--efficiency", metavar="PATH",
                     help="efficiency CSV (default: bundled table)")
    sub.add_argument("--rewards", metavar="PATH",
                     help="reward schedule CSV (default: bundled schedule)")
    sub.add_argument("--electricity", type=float, metavar="USD_PER_KWH",
                     help=f"electricity price (default "
                          f"{DEFAULT_ELECTRICITY_USD_PER_KWH})")
    sub.add_argument("--lags", metavar="N|auto",
                     help="VAR lag order, or 'auto' to select (default: 2)")
    sub.add_argument("--max-p", dest="max_p", type=int, metavar="N",
                     help="highest lag order scanned by selection (default 8)")
    sub.add_argument("--entry-k", dest="entry_k", type=float, metavar="K",
                     help="episode threshold in ratio sigmas (default 2)")
    sub.add_argument("--min-len", dest="min_len", type=int, metavar="N",
                     help="minimum episode run length (default 2)")
    sub.add_argument("--format", choices=("table", "json"),
                     help="stdout format (default table)")
    if with_outputs:
        sub.add_argument("--out-dir", dest="out_dir", metavar="DIR",
                         help="directory for report and figure files (default .)")
        sub.add_argument("--no-provenance-timestamps", action="store_true",
                         help="omit wall-clock timestamps for reproducible output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minecost",
        description="Production-cost pricing model for bitcoin and its backtest.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    price = commands.add_parser("price", help="evaluate the model price")
    price.add_argument("--difficulty", type=float, required=True)
    price.add_argument("--efficiency", type=float, required=True,
                       metavar="W_PER_GHS")
    price.add_argument("--reward", type=float, required=True, metavar="BTC")
    price.add_argument("--electricity", type=float, metavar="USD_PER_KWH",
                       help=f"default {DEFAULT_ELECTRICITY_USD_PER_KWH}")
    price.add_argument("--format", choices=("table", "json"), default="table")
    price.set_defaults(func=cmd_price)

    backtest = commands.add_parser("backtest", help="run the full pipeline")
    _add_dataset_options(backtest, with_outputs=True)
    backtest.set_defaults(func=cmd_backtest)

    regress = commands.add_parser("regress", help="level and log-log regressions")
    _add_dataset_options(regress)
    regress.set_defaults(func=cmd_regress)

    var = commands.add_parser("var", help="lag selection, VAR, Granger tests")
    _add_dataset_options(var)
    var.set_defaults(func=cmd_var)

    ratio = commands.add_parser("ratio", help="ratio statistics and episodes")
    _add_dataset_options(ratio)
    ratio.set_defaults(func=cmd_ratio)

    fetch = commands.add_parser("fetch", help="download raw chart series")
    fetch.add_argument("--base-url", dest="base_url", metavar="URL",
                       help="chart endpoint root (or MINECOST_BASE_URL)")
    fetch.add_argument("--kinds", default=",".join(CHART_KINDS),
                       help="comma-separated chart kinds (default: all)")
    fetch.add_argument("--cache-dir", dest="cache_dir", metavar="DIR",
                       help="cache directory (or MINECOST_CACHE_DIR)")
    fetch.add_argument("--timeout", type=float, default=30.0)
    fetch.set_defaults(func=cmd_fetch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MinecostError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
