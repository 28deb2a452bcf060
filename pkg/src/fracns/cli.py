"""Command line entry point ``fracns``.

Exit codes: 0 all checks passed, 2 a verification check failed, 1 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (REFERENCE_CONFIGS, ConfigError, Scenario, emit_report, render_json,
                          run_scenario)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

_COMMAND_SUITE = {
    "check-params": "check_params",
    "kernel-verify": "kernel_verify",
    "norms": "norms",
    "solve": "solve",
}


def _load_config(path, suite: str) -> dict:
    if path is None:
        if suite not in REFERENCE_CONFIGS:
            raise ConfigError(f"'{suite}' needs --config")
        return json.loads(json.dumps(REFERENCE_CONFIGS[suite]))
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - {"name", "params", "indices", "grids", "fields", "suite", "output", "seed"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    s = cfg.get("suite")
    kind = s.get("kind") if isinstance(s, dict) else s
    if kind is None:
        cfg["suite"] = suite
    elif kind != suite:
        raise ConfigError(f"config suite {kind!r} does not match command ({suite!r})")
    return cfg


def _param_overrides(cfg: dict, ns) -> dict:
    for key in ("alpha", "d"):
        v = getattr(ns, key, None)
        if v is not None:
            cfg.setdefault("params", {})[key] = v
    for key in ("p0", "beta", "p1", "gamma"):
        v = getattr(ns, key, None)
        if v is not None:
            cfg.setdefault("indices", {})[key] = v
    return cfg


def _finish(results, ns, name: str) -> int:
    out_dir = ns.output
    if out_dir:
        fmts = ("json", "csv") if ns.format == "both" else (ns.format,)
        for p in emit_report(results, out_dir, name, fmts):
            print(p, file=sys.stderr)
    else:
        sys.stdout.write(render_json(results, name))
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"[{flag}] {r.name}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracns", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, positional=True):
        if positional:
            p.add_argument("config_path", nargs="?", metavar="config",
                           help="JSON scenario file (defaults to the reference scenario)")
        p.add_argument("--config", help="same as the positional config")
        p.add_argument("--output", help="directory for report files (stdout JSON if omitted)")
        p.add_argument("--format", choices=["json", "csv", "both"], default="both")
        return p

    cp = common(sub.add_parser("check-params", help="derive indices and admissibility verdict"))
    for key in ("alpha", "p0", "beta", "p1", "gamma"):
        cp.add_argument(f"--{key}", help="exact value, e.g. 3/2 (or inf for p0)")
    cp.add_argument("--d", type=int)
    common(sub.add_parser("kernel-verify", help="semigroup kernel bounds and L^p slopes"))
    common(sub.add_parser("norms", help="evaluate one norm of a configured field"))
    common(sub.add_parser("solve", help="Picard iteration for the mild formulation"))
    ce = sub.add_parser("counterexample", help="run counterexample A or B")
    ce.add_argument("which", choices=["A", "B"])
    common(ce)
    st = sub.add_parser("suite", help="run a bundle of reference scenarios")
    st.add_argument("which", choices=["all"])
    common(st, positional=False)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(ns, "config_path", None):
        if ns.config and ns.config != ns.config_path:
            print("fracns: error: config given twice", file=sys.stderr)
            return EXIT_USAGE
        ns.config = ns.config_path
    try:
        if ns.command == "suite":
            if ns.config:
                raise ConfigError("'suite all' runs the built-in reference scenarios only")
            results = [run_scenario(Scenario.from_dict(json.loads(json.dumps(c))))
                       for c in REFERENCE_CONFIGS.values()]
            return _finish(results, ns, "suite_all")
        if ns.command == "counterexample":
            suite = f"counterexample_{ns.which}"
        else:
            suite = _COMMAND_SUITE[ns.command]
        cfg = _load_config(ns.config, suite)
        if ns.command == "check-params":
            cfg = _param_overrides(cfg, ns)
        scn = Scenario.from_dict(cfg)
        if not ns.output and scn.output.get("dir"):
            ns.output = scn.output["dir"]
            ns.format = scn.output.get("format", ns.format)
        result = run_scenario(scn)
        return _finish([result], ns, scn.name)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"fracns: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
