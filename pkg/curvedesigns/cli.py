"""
CURVE-DESIGNS Command Line
build | verify | aut | report
"""

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from .autgroup import (SearchLimits, brute_aut, build_aut_report, check_group_n, frobenius_perm,
                       gl_order, gl_perm_group, question_5_2, singer_torus,
                       stabilizer_profile, torus_normalizer)
from .designs import (LARGE_INCIDENCE_BYTES, BlockKind, DesignError, build_design,
                      block_intersection_sizes, incidence_bytes,
                      complement_dual_holds, enumerates_hyperplanes, expected_params,
                      fano_plane, find_isomorphism, format_block_file, gamma_dual_check,
                      parse_block_file, reciprocity_holds, triple_intersection_holds,
                      action_identities_hold, verify_design)
from .gf2n import MAX_N, MIN_N, FieldError, new_field_ctx
from .ledger import ROW_FIELDS, RunLedger
from .permgrp import GuardExceeded, PermutationError, Verdict
from .settings import ConfigError, config_hash, load_config, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

DESIGN_KINDS = [k.value for k in (BlockKind.PARABOLA, BlockKind.HYPERBOLA,
                                  BlockKind.COMPLEMENT_PARABOLA, BlockKind.COMPLEMENT_HYPERBOLA)]
CURVE_KINDS = [BlockKind.PARABOLA.value, BlockKind.HYPERBOLA.value]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class UsageError(Exception):
    """Invalid arguments that argparse cannot catch on its own"""


@dataclass
class RunConfig:
    """Everything that determines the output of one invocation"""
    command: str
    n_values: List[int]
    modulus: Optional[int] = None
    kind: str = BlockKind.PARABOLA.value
    t: int = 2
    out: Optional[str] = None
    format: str = "text"
    force: bool = False
    seed: int = 0
    exhaustive: Optional[bool] = None
    input: Optional[str] = None
    with_aut: bool = False
    budget: int = 200_000
    sample_pairs: int = 100_000
    jobs: int = 1
    db: Optional[str] = None
    settings: Dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.n_values[0]

    @property
    def limits(self) -> SearchLimits:
        return SearchLimits.from_settings(self.settings, self.budget)

    def fingerprint(self) -> str:
        payload = asdict(self)
        payload.pop("out")
        payload.pop("db")
        return config_hash(payload)


def parse_n_range(text: str) -> List[int]:
    """`3` or `2..6`"""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(text)]
    except ValueError:
        raise UsageError(f"bad --n value {text!r}") from None
    if not values:
        raise UsageError(f"empty range {text!r}")
    bad = [n for n in values if not MIN_N <= n <= MAX_N]
    if bad:
        raise UsageError(f"n must lie in [{MIN_N}, {MAX_N}], got {bad[0]}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--n', type=str, help='Field degree n, or a range a..b for report')
    common.add_argument('--modulus', type=lambda s: int(s, 0), help='Irreducible modulus (e.g. 0b1011 or 0xb)')
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--format', choices=['text', 'json', 'csv'], default='text')
    common.add_argument('--force', action='store_true', help='Lift feasibility guards')
    common.add_argument('--seed', type=int, help='Seed for sampled pair checks')
    common.add_argument('--config', help='Configuration JSON file')
    common.add_argument('--db', help='Record results in this SQLite ledger')
    common.add_argument('--log-level', help='Logging level (stderr)')

    parser = argparse.ArgumentParser(
        prog='curvedesigns',
        description='Parabola and hyperbola 2-designs over F_{2^n}: construction, verification, automorphisms'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    build = sub.add_parser('build', parents=[common], help='Write a canonical block-set file')
    build.add_argument('--kind', choices=DESIGN_KINDS, default='parabola')

    verify = sub.add_parser('verify', parents=[common], help='Verify t-design parameters')
    verify.add_argument('--kind', choices=DESIGN_KINDS, default='parabola')
    verify.add_argument('--t', type=int, choices=[1, 2], default=2)
    verify.add_argument('--exhaustive', action='store_true', help='Check every pair, never sample')
    verify.add_argument('--input', help='Verify a block-set file instead of building')
    verify.add_argument('--sample-pairs', type=int)

    aut = sub.add_parser('aut', parents=[common], help='Automorphism group report (JSON)')
    aut.add_argument('--kind', choices=CURVE_KINDS, default='parabola')
    aut.add_argument('--budget', type=int, help='Node budget for conjugacy searches')

    report = sub.add_parser('report', parents=[common], help='Consolidated table of checked claims')
    report.add_argument('--with-aut', action='store_true', help='Add automorphism-group rows')
    report.add_argument('--budget', type=int)
    report.add_argument('--exhaustive', action='store_true')
    report.add_argument('--sample-pairs', type=int)
    report.add_argument('--jobs', type=int, help='Worker processes across n values')
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    settings = load_config(args.config)
    if args.n is None and not getattr(args, 'input', None):
        raise UsageError("--n is required")
    n_values = parse_n_range(args.n) if args.n is not None else []
    if args.command != 'report' and len(n_values) > 1:
        raise UsageError(f"{args.command} takes a single n")
    if args.modulus is not None and len(n_values) > 1:
        raise UsageError("--modulus fixes one field; combine it with a single --n")
    return RunConfig(
        command=args.command,
        n_values=n_values,
        modulus=args.modulus,
        kind=getattr(args, 'kind', BlockKind.PARABOLA.value),
        t=getattr(args, 't', 2),
        out=args.out,
        format=args.format,
        force=args.force,
        seed=args.seed if args.seed is not None else settings['sampling']['seed'],
        exhaustive=True if getattr(args, 'exhaustive', False) else None,
        input=getattr(args, 'input', None),
        with_aut=getattr(args, 'with_aut', False),
        budget=getattr(args, 'budget', None) or settings['search']['conjugacy_budget'],
        sample_pairs=getattr(args, 'sample_pairs', None) or settings['sampling']['sample_pairs'],
        jobs=getattr(args, 'jobs', None) or settings['report']['max_workers'],
        db=args.db or (settings['ledger']['db_path'] if settings['ledger']['enabled'] else None),
        settings=settings,
    )


def _emit(config: RunConfig, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if config.out:
        Path(config.out).write_text(text)
        logger.info(f"Wrote {config.out}")
    else:
        sys.stdout.write(text)


def _ctx(config: RunConfig, n: Optional[int] = None):
    return new_field_ctx(n if n is not None else config.n, config.modulus)


def _exhaustive_for(config: RunConfig, n: int) -> bool:
    if config.exhaustive is not None:
        return config.exhaustive
    return n <= config.settings['sampling']['exhaustive_max_n']


# --- commands ----------------------------------------------------------------------

def cmd_build(config: RunConfig) -> int:
    design = build_design(_ctx(config), config.kind)
    if config.format == 'json':
        payload = {
            'v': design.v,
            'b': design.b,
            'n': design.ctx.n,
            'modulus': f"{design.ctx.modulus:#x}",
            'kind': design.kind.value,
            'blocks': [
                {'label': f"{blk.label.value:x}", 'points': [f"{i + 1:x}" for i in blk.points()]}
                for blk in design.blocks
            ],
        }
        _emit(config, json.dumps(payload, indent=2, sort_keys=True))
    else:
        _emit(config, format_block_file(design))
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    if config.input:
        try:
            design = parse_block_file(Path(config.input).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {config.input}: {exc}") from None
    else:
        design = build_design(_ctx(config), config.kind)

    n = design.ctx.n if design.ctx else 0
    exhaustive = _exhaustive_for(config, n) if design.ctx else True
    check = verify_design(design, config.t, exhaustive=exhaustive,
                          sample_pairs=config.sample_pairs, seed=config.seed)
    expected = None
    if check.ok and design.ctx is not None and design.kind.value in DESIGN_KINDS and config.t == 2:
        expected = expected_params(design.ctx, design.kind)
        if check.params != expected:
            check.ok = False
            check.violation = f"parameters {check.params} differ from expected {expected}"

    if config.format == 'json':
        payload = check.to_dict()
        payload['kind'] = design.kind.value
        payload['seed'] = config.seed
        payload['expected'] = expected.to_dict() if expected else None
        _emit(config, json.dumps(payload, indent=2, sort_keys=True))
    elif check.ok:
        p = check.params
        mode = "exhaustive" if check.exhaustive else f"sampled, seed {config.seed}"
        _emit(config, f"[OK] {design.kind.value}: {p} (b={p.b}, r={p.r}; {check.pairs_checked} pairs, {mode})")
    else:
        _emit(config, f"[FAIL] {design.kind.value}: {check.violation}; witness {list(check.witness)}")
    return EXIT_OK if check.ok else EXIT_VIOLATION


def cmd_aut(config: RunConfig) -> int:
    ctx = _ctx(config)
    report = build_aut_report(ctx, config.kind, force=config.force, limits=config.limits)
    _emit(config, report.to_json())
    _record(config, [{'n': ctx.n, 'modulus': f"{ctx.modulus:#x}", 'claim': f"aut_{config.kind}",
                      'status': report.status,
                      'detail': "; ".join(report.failures)}])
    if report.status == "fail":
        return EXIT_VIOLATION
    if report.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _row(ctx, claim: str, ok, detail: str = "") -> Dict:
    if ok is None:
        status = INCONCLUSIVE
    else:
        status = PASS if ok else FAIL
    return {'n': ctx.n, 'modulus': f"{ctx.modulus:#x}", 'claim': claim, 'status': status, 'detail': detail}


def report_rows(n: int, modulus: Optional[int], settings: Dict, *, exhaustive: Optional[bool] = None,
                sample_pairs: int = 100_000, seed: int = 0, with_aut: bool = False,
                force: bool = False, budget: int = 200_000) -> List[Dict]:
    """Every claim checked at one n, in a fixed order"""
    ctx = new_field_ctx(n, modulus)
    limits = settings['report']
    rows = []
    if exhaustive is None:
        exhaustive = n <= settings['sampling']['exhaustive_max_n']

    for kind in (BlockKind.PARABOLA, BlockKind.HYPERBOLA):
        check = verify_design(build_design(ctx, kind), 2, exhaustive=exhaustive,
                              sample_pairs=sample_pairs, seed=seed)
        expected = expected_params(ctx, kind)
        ok = check.ok and check.params == expected
        mode = "exhaustive" if check.exhaustive else f"sampled {check.pairs_checked} pairs, seed {seed}"
        detail = f"{check.params} ({mode})" if check.ok else str(check.violation)
        rows.append(_row(ctx, f"design_params_{kind.value}", ok, detail))

    if n <= limits['complement_max_n']:
        comp = build_design(ctx, BlockKind.COMPLEMENT_HYPERBOLA)
        check = verify_design(comp, 2, exhaustive=True)
        expected = expected_params(ctx, BlockKind.COMPLEMENT_HYPERBOLA)
        rows.append(_row(ctx, "complement_params", check.ok and check.params == expected,
                         str(check.params) if check.ok else str(check.violation)))
        sizes = block_intersection_sizes(comp)
        rows.append(_row(ctx, "complement_intersections", list(sizes) == [ctx.q // 4],
                         f"sizes {sorted(sizes)}"))
    if n <= limits['duality_max_n']:
        rows.append(_row(ctx, "duality_gamma", gamma_dual_check(ctx)))
        rows.append(_row(ctx, "complement_dual", complement_dual_holds(ctx)))
    if n <= limits['hyperplanes_max_n']:
        rows.append(_row(ctx, "parabola_hyperplanes", enumerates_hyperplanes(ctx)))
    if n <= limits['reciprocity_max_n']:
        rows.append(_row(ctx, "reciprocity", reciprocity_holds(ctx)))
    if n <= limits['triple_intersection_max_n']:
        rows.append(_row(ctx, "triple_intersection", triple_intersection_holds(ctx)))
    if n <= limits['action_identities_max_n']:
        rows.append(_row(ctx, "multiplication_action", action_identities_hold(ctx)))

    torus = singer_torus(ctx)
    rows.append(_row(ctx, "singer_torus", torus.order() == ctx.order and torus.is_transitive(),
                     f"order {torus.order()}"))
    theta = frobenius_perm(ctx)
    rows.append(_row(ctx, "frobenius_order", theta.order() == ctx.n, f"order {theta.order()}"))
    if n == 3:
        fano = fano_plane()
        iso = all(find_isomorphism(build_design(ctx, kind), fano) is not None for kind in CURVE_KINDS)
        rows.append(_row(ctx, "fano_instance", iso))

    if with_aut:
        rows.extend(_aut_rows(ctx, settings, force=force, budget=budget))
    return rows


def _aut_rows(ctx, settings: Dict, *, force: bool, budget: int) -> List[Dict]:
    limits = SearchLimits.from_settings(settings, budget)
    check_group_n(ctx, force, limits.group_max_n)
    rows = []
    d_u = build_design(ctx, BlockKind.PARABOLA)
    d_o = build_design(ctx, BlockKind.HYPERBOLA)
    aut_u = brute_aut(d_u, force=force, max_degree=limits.brute_aut_max_degree)
    aut_o = brute_aut(d_o, force=force, max_degree=limits.brute_aut_max_degree)
    gl = gl_perm_group(ctx)
    order = gl_order(ctx.n)

    rows.append(_row(ctx, "aut_parabola_equals_gl", aut_u.order() == order and aut_u.same_group(gl),
                     f"order {aut_u.order()}"))
    same = aut_o.same_group(gl)
    rows.append(_row(ctx, "aut_hyperbola_order", aut_o.order() == order,
                     f"order {aut_o.order()}, equals GL: {same}"))
    rows.append(_row(ctx, "aut_hyperbola_differs", (not same) if ctx.n >= 3 else same))
    for kind, group in ((BlockKind.PARABOLA, aut_u), (BlockKind.HYPERBOLA, aut_o)):
        profile = stabilizer_profile(ctx, kind, group=group, force=force, limits=limits)
        rows.append(_row(ctx, f"stabilizers_{kind.value}", profile.holds,
                         f"orders {profile.point_stabilizer_order}/{profile.block_stabilizer_order}, "
                         f"orbits {profile.block_stabilizer_orbits}, {profile.conjugacy.verdict.value}"))
    even = aut_u.all_even() and aut_o.all_even()
    rows.append(_row(ctx, "alt_membership", even if ctx.n >= 3 else not even and aut_u.order() == 6))
    torus, theta = singer_torus(ctx), frobenius_perm(ctx)
    rows.append(_row(ctx, "torus_frobenius_inside",
                     torus.subgroup_of(aut_u) and torus.subgroup_of(aut_o)
                     and aut_u.contains(theta) and aut_o.contains(theta)))
    normalizer = torus_normalizer(ctx, force=force, max_n=limits.group_max_n)
    rows.append(_row(ctx, "torus_normalizer", normalizer.holds,
                     f"order {normalizer.normalizer_order}, count {normalizer.normalizer_count}"))

    evidence = question_5_2(ctx, aut_u=aut_u, aut_o=aut_o, force=force, limits=limits)
    rows.append({**_row(ctx, "q52_intersection", True,
                        f"{evidence.intersection_order} vs n(q-1) = {evidence.expected_order}"),
                 'status': evidence.part_i.value})
    for label, rep in (("q52_sym_conjugacy", evidence.sym), ("q52_alt_conjugacy", evidence.alt)):
        counts = rep.parity_counts
        rows.append({**_row(ctx, label, rep.verdict is not Verdict.INCONCLUSIVE,
                            f"{len(rep.witnesses)} witnesses (even {counts['even']}, odd {counts['odd']}), "
                            f"exhaustive {rep.exhaustive}"),
                     'status': rep.verdict.value})
    return rows


def _report_rows_task(args) -> List[Dict]:
    n, modulus, settings, options = args
    return report_rows(n, modulus, settings, **options)


def cmd_report(config: RunConfig) -> int:
    options = {
        'exhaustive': config.exhaustive,
        'sample_pairs': config.sample_pairs,
        'seed': config.seed,
        'with_aut': config.with_aut,
        'force': config.force,
        'budget': config.budget,
    }
    if config.with_aut and not config.force:
        limit = config.settings['guards']['group_max_n']
        too_big = [n for n in config.n_values if n > limit]
        if too_big:
            raise GuardExceeded(f"--with-aut at n = {too_big[0]} exceeds guard n <= {limit}; use --force")
    tasks = [(n, config.modulus, config.settings, options) for n in config.n_values]

    start = time.time()
    if config.jobs > 1 and len(tasks) > 1:
        peak = min(config.jobs, len(tasks)) * incidence_bytes(_ctx(config, config.n_values[-1]))
        if peak > LARGE_INCIDENCE_BYTES:
            logger.warning(f"{config.jobs} workers up to n = {config.n_values[-1]} may hold "
                           f"{peak / 2**20:.0f} MiB of incidence at once; consider --jobs 1")
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            per_n = list(pool.map(_report_rows_task, tasks))
    else:
        per_n = [_report_rows_task(task) for task in tasks]
    rows = [row for chunk in per_n for row in chunk]
    logger.info(f"Report over n = {config.n_values[0]}..{config.n_values[-1]}: "
                f"{len(rows)} rows in {time.time() - start:.1f}s")

    df = pd.DataFrame(rows, columns=list(ROW_FIELDS))
    if config.format == 'csv':
        _emit(config, df.to_csv(index=False))
    elif config.format == 'json':
        payload = {'schema': config.settings['system']['report_schema'],
                   'rows': df.to_dict(orient='records')}
        _emit(config, json.dumps(payload, indent=2, sort_keys=True))
    else:
        _emit(config, df.to_string(index=False))
    _record(config, rows)

    statuses = set(df['status'])
    if FAIL in statuses:
        return EXIT_VIOLATION
    if INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _record(config: RunConfig, rows: List[Dict]) -> None:
    if config.db:
        RunLedger(config.db).record(config.command, config.fingerprint(), rows)


COMMANDS = {
    'build': cmd_build,
    'verify': cmd_verify,
    'aut': cmd_aut,
    'report': cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = build_run_config(args)
        level = args.log_level or config.settings['monitoring']['log_level']
        setup_logging(level, config.settings['monitoring']['log_format'])
        return COMMANDS[config.command](config)
    except (UsageError, ConfigError, GuardExceeded, FieldError, DesignError,
            PermutationError, OSError) as exc:
        print(f"[FAIL] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
