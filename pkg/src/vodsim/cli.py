"""Command-line entry point: single runs, sweeps, strategy comparisons,
closed-form tables and trace generation.

Exit codes: 0 success, 1 validation error, 2 run failure, 3 verdict failure.
"""

from __future__ import annotations

import argparse
import configparser
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import analytics
from .engine import ConfigError, RunConfig, run, sweep
from .metrics import MetricsReport, export_report
from .workload import generate_traces, save_traces

# Scenario file layout: section -> {key -> RunConfig field}.
_SECTIONS = {
    "video": {
        "segment_count": "segment_count",
        "segment_duration_s": "segment_duration_s",
        "streaming_rate_bps": "streaming_rate_bps",
    },
    "topology": {
        "as_count": "as_count",
        "routers_per_as": "routers_per_as",
        "access_delay_ms_min": "access_delay_ms_min",
        "access_delay_ms_max": "access_delay_ms_max",
        "peer_up_bps": "peer_up_bps",
        "peer_down_bps": "peer_down_bps",
        "server_up_bps": "server_up_bps",
    },
    "workload": {
        "peer_count": "peer_count",
        "arrival_rate": "arrival_rate",
        "seek_rate": "seek_rate",
        "seek_distribution": "seek_distribution",
        "zipf_alpha": "zipf_alpha",
        "forward_fraction": "forward_fraction",
        "short_session_fraction": "short_session_fraction",
        "pause_rate": "pause_rate",
        "trace_file": "trace_file",
    },
    "strategy": {
        "name": "strategy",
        "session_width_s": "session_width_s",
        "urgent_window_s": "urgent_window_s",
        "prefetch_budget": "prefetch_budget",
        "plan_period_s": "plan_period_s",
        "gossip_period_s": "gossip_period_s",
        "cache_capacity": "cache_capacity",
        "prefetch_ttl_s": "prefetch_ttl_s",
        "trail_keep": "trail_keep",
        "coop_horizon": "coop_horizon",
        "mining_window": "mining_window",
        "mining_fanout": "mining_fanout",
        "mining_support": "mining_support",
        "pop_period_s": "pop_period_s",
        "pop_list_length": "pop_list_length",
        "shortcut_k": "shortcut_k",
        "shortcut_refresh_s": "shortcut_refresh_s",
        "request_timeout_s": "request_timeout_s",
        "max_concurrent_fetch": "max_concurrent_fetch",
        "max_uploads": "max_uploads",
    },
    "run": {
        "duration_s": "duration_s",
        "seed": "seed",
    },
}

_INT_FIELDS = {
    "segment_count", "as_count", "routers_per_as", "peer_count", "seed",
    "prefetch_budget", "cache_capacity", "trail_keep", "coop_horizon",
    "mining_window", "mining_fanout", "pop_list_length", "shortcut_k",
    "max_concurrent_fetch", "max_uploads",
}
_STR_FIELDS = {"seek_distribution", "strategy", "trace_file"}


def _convert(field: str, raw: str):
    raw = raw.strip()
    try:
        if field in _STR_FIELDS:
            return raw
        if field in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(field, "cannot parse value %r" % raw)


def parse_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig: flags override file values override defaults."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            read = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError("config", "unparsable file %s: %s" % (path, exc))
        if not read:
            raise ConfigError("config", "cannot read file %s" % path)
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(section, "unknown section")
            known = _SECTIONS[section]
            for key, raw in parser.items(section):
                if key not in known:
                    raise ConfigError("%s.%s" % (section, key), "unknown key")
                values[known[key]] = _convert(known[key], raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Strategy comparison and verdicts
# ---------------------------------------------------------------------------

def _pooled_mean_latency(reports: list[MetricsReport]) -> float | None:
    total, n = 0.0, 0
    for r in reports:
        if r.lat_mean_s is not None and r.seeks:
            total += r.lat_mean_s * r.seeks
            n += r.seeks
    return total / n if n else None


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def early_decile_gap(reports: list[MetricsReport]) -> tuple[float, float] | None:
    """Pooled (earliest-decile mean latency, overall mean latency).

    Peer ids are assigned in arrival order, so the earliest tenth of peers is
    simply the lowest tenth of ids present in the run.
    """
    early_sum = early_n = all_sum = all_n = 0.0
    for rep in reports:
        if not rep.peer_latency:
            continue
        pids = sorted(rep.peer_latency)
        decile = set(pids[: max(1, len(pids) // 10)])
        for pid, (lat_sum, count) in rep.peer_latency.items():
            all_sum += lat_sum
            all_n += count
            if pid in decile:
                early_sum += lat_sum
                early_n += count
    if early_n == 0 or all_n == 0:
        return None
    return early_sum / early_n, all_sum / all_n


def compute_verdicts(by_strategy: dict[str, list[MetricsReport]]
                     ) -> list[tuple[str, bool, str]]:
    """Ordering checks over paired runs, one report list per strategy.

    Checks that need absent strategies are skipped. Reports within one
    strategy must be ordered by seed, pairing up across strategies.
    """
    verdicts: list[tuple[str, bool, str]] = []
    have = set(by_strategy)

    def seeds(name):
        return [r.seed for r in by_strategy[name]]

    if {"none"} <= have:
        zeros = all((r.hr_r or 0.0) == 0.0 for r in by_strategy["none"])
        no_ctrl = all(r.overhead_msgs == 0 for r in by_strategy["none"])
        verdicts.append(("no_prefetch_zero_hit_ratio", zeros and no_ctrl,
                         "HR_r=0 and control overhead 0 on every none run"))

    cascade = ["cooperative", "mining", "popularity", "random", "none"]
    if set(cascade) <= have:
        n_seeds = len(by_strategy["cooperative"])
        ok_seeds = 0
        details = []
        for i in range(n_seeds):
            hr = {s: (by_strategy[s][i].hr_r or 0.0) for s in cascade}
            hg = {s: (by_strategy[s][i].hr_g or 0.0) for s in cascade}
            ordered = (
                hr["cooperative"] >= hr["mining"] >= hr["popularity"]
                and hr["popularity"] > hr["random"] > hr["none"] == 0.0
            )
            coop_g = hg["cooperative"] > max(hg[s] for s in cascade if s != "cooperative")
            ok_seeds += 1 if (ordered and coop_g) else 0
            details.append("seed %d: %s" % (
                by_strategy["cooperative"][i].seed,
                "ok" if (ordered and coop_g) else
                "hr=%s hg=%s" % ({k: round(v, 3) for k, v in hr.items()},
                                 {k: round(v, 3) for k, v in hg.items()})))
        need = max(1, n_seeds - 1)
        verdicts.append(("hit_ratio_ordering", ok_seeds >= need,
                         "%d/%d seeds ordered (need >= %d); %s"
                         % (ok_seeds, n_seeds, need, "; ".join(details))))

    if {"cooperative"} <= have and len(have) > 1:
        coop_lat = _pooled_mean_latency(by_strategy["cooperative"])
        others = {s: _pooled_mean_latency(rs) for s, rs in by_strategy.items()
                  if s != "cooperative"}
        ok = coop_lat is not None and all(
            o is not None and coop_lat < o for o in others.values())
        verdicts.append(("latency_cooperative_lowest", ok,
                         "coop=%.4f vs %s" % (
                             coop_lat if coop_lat is not None else float("nan"),
                             {s: None if v is None else round(v, 4)
                              for s, v in others.items()})))

    if {"cooperative"} <= have:
        gap = early_decile_gap(by_strategy["cooperative"])
        if gap is not None:
            early, overall = gap
            verdicts.append(("latency_early_peers_higher", early > overall,
                             "early decile %.4f vs overall %.4f" % (early, overall)))

    if {"cooperative", "mining"} <= have:
        coop_rel = _mean(r.util_rel for r in by_strategy["cooperative"])
        mining_rel = _mean(r.util_rel for r in by_strategy["mining"])
        ok = coop_rel is not None and mining_rel is not None and coop_rel <= mining_rel
        verdicts.append(("relative_utilization_coop_not_above_mining", ok,
                         "coop=%.4f mining=%.4f" % (coop_rel or -1, mining_rel or -1)))

    if {"cooperative"} <= have and len(have) > 1:
        coop_glob = _mean(r.util_glob for r in by_strategy["cooperative"])
        others = {s: _mean(r.util_glob for r in rs)
                  for s, rs in by_strategy.items() if s != "cooperative"}
        comparable = {s: v for s, v in others.items() if v is not None}
        ok = coop_glob is not None and all(coop_glob >= v for v in comparable.values())
        verdicts.append(("global_utilization_coop_max", ok,
                         "coop=%.4f vs %s" % (
                             coop_glob if coop_glob is not None else float("nan"),
                             {s: round(v, 4) for s, v in comparable.items()})))

    if {"random"} <= have:
        ok = all(r.overhead_msgs == 0 for r in by_strategy["random"])
        verdicts.append(("overhead_random_zero", ok,
                         "control messages %s" %
                         [r.overhead_msgs for r in by_strategy["random"]]))

    if {"cooperative", "popularity", "mining"} <= have:
        ok = True
        rows = []
        for i, coop in enumerate(by_strategy["cooperative"]):
            pop = by_strategy["popularity"][i].overhead_msgs
            mine = by_strategy["mining"][i].overhead_msgs
            rows.append("seed %d: coop=%d pop=%d mining=%d"
                        % (coop.seed, coop.overhead_msgs, pop, mine))
            ok = ok and coop.overhead_msgs < pop and coop.overhead_msgs < mine
        verdicts.append(("overhead_coop_below_pop_and_mining", ok, "; ".join(rows)))

    return verdicts


def compare_strategies(base: RunConfig, strategy_names: list[str], repeats: int,
                       parallelism: int, out_dir: Path) -> tuple[list[MetricsReport], list]:
    """Run every strategy on the same workloads; emit CSVs and verdicts."""
    if repeats < 1:
        raise ConfigError("repeats", "must be >= 1")
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = []
    for r in range(repeats):
        seed = base.seed + r
        probe = replace(base, seed=seed)
        traces = generate_traces(probe.workload_params(), probe.video())
        name = "traces.txt" if repeats == 1 else "traces_%d.txt" % seed
        save_traces(traces, out_dir / name)
        for sname in strategy_names:
            configs.append(replace(base, strategy=sname, seed=seed))
    reports = sweep(configs, parallelism)

    by_strategy: dict[str, list[MetricsReport]] = {}
    for rep in reports:
        by_strategy.setdefault(rep.strategy, []).append(rep)
        export_report(rep, out_dir)
    for reps in by_strategy.values():
        reps.sort(key=lambda r: r.seed)

    _write_comparison_csv(by_strategy, out_dir / "comparison.csv")
    verdicts = compute_verdicts(by_strategy)
    lines = ["%s %s: %s" % ("PASS" if ok else "FAIL", name, detail)
             for name, ok, detail in verdicts]
    (out_dir / "verdicts.txt").write_text("\n".join(lines) + "\n" if lines else "")
    return reports, verdicts


def _write_comparison_csv(by_strategy, path: Path) -> None:
    header = ("strategy,runs,hr_r_mean,hr_r_std,hr_g_mean,hr_g_std,"
              "lat_mean_s,lat_std_s,util_rel_mean,util_glob_mean,"
              "overhead_mean,overhead_std")
    lines = [header]

    def ms(values):
        vals = [v for v in values if v is not None]
        if not vals:
            return "", ""
        mean = sum(vals) / len(vals)
        std = statistics.pstdev(vals) if len(vals) > 1 else 0.0
        return "%.6f" % mean, "%.6f" % std

    for name in sorted(by_strategy):
        reps = by_strategy[name]
        hr_m, hr_s = ms([r.hr_r for r in reps])
        hg_m, hg_s = ms([r.hr_g for r in reps])
        lat_m, lat_s = ms([r.lat_mean_s for r in reps])
        ur_m, _ = ms([r.util_rel for r in reps])
        ug_m, _ = ms([r.util_glob for r in reps])
        ov_m, ov_s = ms([float(r.overhead_msgs) for r in reps])
        lines.append(",".join([name, str(len(reps)), hr_m, hr_s, hg_m, hg_s,
                               lat_m, lat_s, ur_m, ug_m, ov_m, ov_s]))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario file (key = value sections)")
    p.add_argument("--strategy", choices=("none", "random", "popularity", "mining", "cooperative"))
    p.add_argument("--seed", type=int)
    p.add_argument("--peers", type=int, dest="peer_count")
    p.add_argument("--duration", type=float, dest="duration_s")
    p.add_argument("--trace-file", dest="trace_file")
    p.add_argument("--out-dir", default="out")


def _config_from_args(args) -> RunConfig:
    overrides = {
        "strategy": getattr(args, "strategy", None),
        "seed": getattr(args, "seed", None),
        "peer_count": getattr(args, "peer_count", None),
        "duration_s": getattr(args, "duration_s", None),
        "trace_file": getattr(args, "trace_file", None),
    }
    return parse_config(args.config, overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    out = Path(args.out_dir)
    try:
        report = run(cfg)
    except Exception as exc:
        print("run failed: %s" % exc, file=sys.stderr)
        return 2
    export_report(report, out)
    traces = generate_traces(cfg.workload_params(), cfg.video()) \
        if not cfg.trace_file else None
    if traces is not None:
        save_traces(traces, out / "traces.txt")
    print("strategy=%s seed=%d seeks=%d hr_r=%s hr_g=%s overhead=%d"
          % (report.strategy, report.seed, report.seeks,
             report.hr_r, report.hr_g, report.overhead_msgs))
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    configs = [replace(cfg, seed=cfg.seed + i) for i in range(args.repeats)]
    out = Path(args.out_dir)
    try:
        reports = sweep(configs, args.parallelism)
    except Exception as exc:
        print("sweep failed: %s" % exc, file=sys.stderr)
        return 2
    for rep in reports:
        export_report(rep, out)
    print("wrote %d reports to %s" % (len(reports), out))
    return 0


def _cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for name in names:
        if name not in ("none", "random", "popularity", "mining", "cooperative"):
            raise ConfigError("strategies", "unknown strategy %r" % name)
    out = Path(args.out_dir)
    try:
        _, verdicts = compare_strategies(cfg, names, args.repeats, args.parallelism, out)
    except ConfigError:
        raise
    except Exception as exc:
        print("compare failed: %s" % exc, file=sys.stderr)
        return 2
    failed = [name for name, ok, _ in verdicts if not ok]
    for name, ok, detail in verdicts:
        print("%s %s" % ("PASS" if ok else "FAIL", name))
    if failed:
        print("verdicts failed: %s" % ", ".join(failed), file=sys.stderr)
        return 3
    return 0


def _cmd_analytics(args) -> int:
    params = analytics.AnalyticParams(
        cache_slots=args.cache_slots,
        session_slots=args.session_slots,
        reachable=args.reachable,
        mined_set_size=args.mined_size,
        hit_probability=args.hit_prob,
    )
    table = analytics.evaluate(params)
    print("strategy      hr_r      hr_r+hr_g")
    for name in ("none", "random", "popularity", "mining"):
        if name in table:
            pair = table[name]
            suffix = "  (clamped)" if pair.clamped else ""
            note = "  [%s]" % pair.note if pair.note else ""
            print("%-12s %9.6f %9.6f%s%s"
                  % (name, float(pair.hr_r), float(pair.hr_r_plus_g), suffix, note))
    return 0


def _cmd_trace_gen(args) -> int:
    cfg = _config_from_args(args)
    traces = generate_traces(cfg.workload_params(), cfg.video())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_traces(traces, out)
    print("wrote %d traces to %s" % (len(traces), out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vodsim",
        description="P2P video-on-demand prefetching strategy simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one run and export its report")
    _add_common(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="repeat a config across consecutive seeds")
    _add_common(p)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("compare", help="run strategies on paired workloads")
    _add_common(p)
    p.add_argument("--strategies", default="none,random,popularity,mining,cooperative")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("analytics", help="print the closed-form hit-ratio table")
    p.add_argument("--cache-slots", type=int, required=True)
    p.add_argument("--session-slots", type=int, required=True)
    p.add_argument("--reachable", type=int, default=0)
    p.add_argument("--mined-size", type=int, default=0)
    p.add_argument("--hit-prob", type=float, default=1.0)
    p.set_defaults(fn=_cmd_analytics)

    p = sub.add_parser("trace-gen", help="generate a reusable workload trace file")
    _add_common(p)
    p.add_argument("--out", default="traces.txt")
    p.set_defaults(fn=_cmd_trace_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print("invalid configuration: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
