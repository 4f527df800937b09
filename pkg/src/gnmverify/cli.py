"""Command-line entry point.

Subcommands: group, simulate, bounds, adversary, appendix,
reproduce-experiment. Reports land under --out as CSV or JSON tables
with PNG figures beside them plus a manifest.json describing the run.
Exit codes: 0 success, 2 validation failure, 3 infeasible size,
4 bound violation detected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, reports
from .analysis import (
    bound_table,
    gap_optimize,
    klein_soundness_bound,
    omax_bruteforce,
    omax_closed_form,
    random_feasible_instance,
    soundness_bound,
)
from .errors import NotAGroup, StrategyDimensionMismatch, TooLargeForExact
from .groups import FiniteGroup, Subgroup, resolve_group, subgroup_closure
from .protocol import (
    ArbitraryJoint,
    BasisBogus,
    HonestCoset,
    OptimalAdversary,
    ProductJoint,
    ProtocolConfig,
    ProverStrategy,
    PureBogus,
    build_accept_operator,
    describe_strategy,
    exact_accept_probability,
    monte_carlo,
)
from .qsim import (
    DEFAULT_DIM_CAP,
    DensityState,
    NoiseSpec,
    PureState,
    core_circuit,
    coset_proof_state,
    basis_state,
)
from .rng import stream
from .sampling import SamplerSpec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_VIOLATION = 4

BOUND_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Shared resolution helpers


def _dim_cap() -> int:
    return int(os.environ.get("GNM_DIM_CAP", DEFAULT_DIM_CAP))


def resolve_element(group: FiniteGroup, ref) -> int:
    if isinstance(ref, int):
        if not 0 <= ref < group.order:
            raise ValueError(f"element index {ref} out of range")
        return ref
    return group.index_of(str(ref))


def resolve_subgroup(group: FiniteGroup, named: dict[str, list[str]], ref) -> Subgroup:
    if isinstance(ref, str):
        if ref not in named:
            raise ValueError(f"group file defines no subgroup named {ref!r}")
        gens = named[ref]
    else:
        gens = ref
    return subgroup_closure(group, [resolve_element(group, g) for g in gens])


def parse_strategy(payload: dict | None, group: FiniteGroup) -> ProverStrategy:
    payload = payload or {"kind": "honest"}
    kind = str(payload.get("kind", "honest")).lower()
    if kind == "honest":
        alpha = payload.get("alpha")
        return HonestCoset(alpha=None if alpha is None else resolve_element(group, alpha))
    if kind == "basis":
        return BasisBogus(element=resolve_element(group, payload["element"]))
    if kind == "pure":
        amps = np.array([complex(re, im) for re, im in payload["amplitudes"]])
        return PureBogus(amplitudes=amps)
    if kind == "product":
        states = tuple(PureState.from_json_dict(entry) for entry in payload["states"])
        return ProductJoint(states=states)
    if kind == "joint":
        state_payload = payload["state"]
        if "matrix" in state_payload:
            return ArbitraryJoint(state=DensityState.from_json_dict(state_payload))
        return ArbitraryJoint(state=PureState.from_json_dict(state_payload))
    if kind == "optimal":
        return OptimalAdversary()
    raise ValueError(f"unknown strategy kind {kind!r}")


def protocol_config(payload: dict, args: argparse.Namespace) -> ProtocolConfig:
    noise = payload.get("noise")
    return ProtocolConfig(
        m=int(payload.get("m", 2)),
        sampler=SamplerSpec.from_dict(payload.get("sampler", {})),
        noise=None if noise is None else NoiseSpec.from_dict(noise),
        junk_dims=int(payload.get("junk_dims", 0)),
        seed=int(args.seed if args.seed is not None else payload.get("seed", 0)),
        trials=int(args.trials if args.trials is not None else payload.get("trials", 10_000)),
        test_elements=str(payload.get("test_elements", "all")),
        dim_cap=_dim_cap(),
    )


def config_to_dict(config: ProtocolConfig) -> dict:
    return {
        "m": config.m,
        "sampler": config.sampler.to_dict(),
        "noise": None if config.noise is None else config.noise.to_dict(),
        "junk_dims": config.junk_dims,
        "seed": config.seed,
        "trials": config.trials,
        "test_elements": config.test_elements,
        "dim_cap": config.dim_cap,
    }


def write_manifest(
    out_dir: Path,
    command: str,
    *,
    config_path: str | None,
    resolved_config: dict | None,
    group: FiniteGroup | None,
    strategy: str | None,
    outputs: list[Path],
    started: float,
) -> None:
    payload = {
        "tool_version": __version__,
        "command": command,
        "config_path": config_path,
        "resolved_config": resolved_config,
        "group_fingerprint": None if group is None else group.fingerprint(),
        "strategy": strategy,
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": time.time() - started,
    }
    reports.write_json(out_dir / "manifest.json", payload)


def _should_plot(args: argparse.Namespace) -> bool:
    return args.out is not None and not getattr(args, "no_plot", False)


# ---------------------------------------------------------------------------
# group


def cmd_group(args: argparse.Namespace) -> int:
    group, named = resolve_group(args.group)
    print(f"group of order {group.order}, identity {group.name_of(group.identity)}")
    print("element orders:")
    for i in range(group.order):
        print(f"  {group.name_of(i)}: {group.element_orders[i]}")
    requested = dict(named)
    for extra in args.subgroup or []:
        gens = [s.strip() for s in extra.split(",") if s.strip()]
        requested[f"<{','.join(gens)}>"] = gens
    summary = {"order": group.order, "identity": group.name_of(group.identity),
               "element_orders": {group.name_of(i): int(group.element_orders[i]) for i in range(group.order)},
               "subgroups": {}}
    for name, gens in requested.items():
        sub = subgroup_closure(group, [resolve_element(group, x) for x in gens])
        cosets = [[group.name_of(x) for x in block] for block in sub.cosets]
        print(f"subgroup {name} = <{', '.join(gens)}> = {{{', '.join(sub.names())}}}")
        print(f"  cosets: {cosets}")
        summary["subgroups"][name] = {
            "generators": gens,
            "elements": list(sub.names()),
            "cosets": cosets,
        }
    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        path = out / "group_summary.json"
        reports.write_json(path, summary)
        write_manifest(out, "group", config_path=str(args.group), resolved_config=None,
                       group=group, strategy=None, outputs=[path], started=started)
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _applicable_bounds(group: FiniteGroup, subgroup: Subgroup, g: int, m: int) -> dict:
    bounds = {"bound_8_over_m": soundness_bound(m), "klein_bound": None}
    if group.order == 4 and int(group.element_orders.max()) == 2:
        bounds["klein_bound"] = klein_soundness_bound(m)
    return bounds


def cmd_simulate(args: argparse.Namespace) -> int:
    payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
    group, named = resolve_group(payload["group"])
    subgroup = resolve_subgroup(group, named, payload["subgroup"])
    g = resolve_element(group, payload["g"])
    strategy = parse_strategy(payload.get("strategy"), group)
    config = protocol_config(payload, args)

    exact_value: float | None = None
    warning = None
    if not args.monte_carlo:
        try:
            exact_value = exact_accept_probability(strategy, g, subgroup, config)
        except TooLargeForExact as exc:
            warning = f"exact engine infeasible ({exc}); falling back to Monte Carlo"
            print(f"warning: {warning}", file=sys.stderr)
    mc = None
    if not args.exact or exact_value is None:
        mc = monte_carlo(strategy, g, subgroup, config, keep_records=args.records)

    in_subgroup = subgroup.contains(g)
    bounds = _applicable_bounds(group, subgroup, g, config.m)
    flags: dict[str, bool | None] = {"soundness_ok": None, "completeness_ok": None}
    violation = False
    if in_subgroup and g != group.identity:
        cap = bounds["bound_8_over_m"]
        if bounds["klein_bound"] is not None:
            cap = min(cap, bounds["klein_bound"])
        checks = []
        if exact_value is not None:
            checks.append(exact_value <= cap + BOUND_SLACK)
        if mc is not None:
            checks.append(mc.accept_rate <= cap + 4.0 * mc.std_error + BOUND_SLACK)
        flags["soundness_ok"] = all(checks) if checks else None
        violation = flags["soundness_ok"] is False
    if (
        isinstance(strategy, HonestCoset)
        and not in_subgroup
        and (config.noise is None or config.noise.is_trivial)
        and exact_value is not None
    ):
        flags["completeness_ok"] = abs(exact_value - 0.5) <= 1e-12
        violation = violation or not flags["completeness_ok"]

    row = {
        "strategy": describe_strategy(strategy, group),
        "g": group.name_of(g),
        "subgroup": ",".join(subgroup.names()),
        "m": config.m,
        "in_subgroup": in_subgroup,
        "exact_accept": exact_value,
        "mc_accept": None if mc is None else mc.accept_rate,
        "mc_std_error": None if mc is None else mc.std_error,
        "trials": None if mc is None else mc.trials,
        "rsi_accept_rate": None if mc is None else mc.rsi_accept_rate,
        "reserved_span_rate": None if mc is None else mc.reserved_span_rate,
        "prove_one_rate": None if mc is None else mc.prove_one_rate,
        "bound_8_over_m": bounds["bound_8_over_m"],
        "klein_bound": bounds["klein_bound"],
        "soundness_ok": flags["soundness_ok"],
        "completeness_ok": flags["completeness_ok"],
        "warning": warning,
    }
    print(f"strategy: {row['strategy']}")
    print(f"query g={row['g']} against S={{{row['subgroup']}}} (member: {in_subgroup}), m={config.m}")
    if exact_value is not None:
        print(f"exact acceptance: {exact_value:.12f}")
    if mc is not None:
        print(f"monte carlo acceptance: {mc.accept_rate:.6f} +- {mc.std_error:.6f} ({mc.trials} trials)")
        print(f"stage rates: inspection {mc.rsi_accept_rate:.6f}, reserved span {mc.reserved_span_rate:.6f}, "
              f"prove {mc.prove_one_rate:.6f}")
    for key in ("soundness_ok", "completeness_ok"):
        if flags[key] is not None:
            print(f"{key}: {flags[key]}")

    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        outputs = [reports.write_rows(out / "simulate", args.format, list(row.keys()), [row])]
        if args.records and mc is not None and mc.records is not None:
            rec_rows = [
                {
                    "trial": t,
                    "reserved_index": r.reserved_index,
                    "test_outcomes": "".join(str(b) for b in r.test_outcomes),
                    "sampled_elements": ";".join(
                        "-" if e is None else group.name_of(e) for e in r.sampled_elements
                    ),
                    "span_outcomes": "".join(str(b) for b in r.span_outcomes),
                    "prove_outcome": r.prove_outcome,
                    "accepted": r.accepted,
                }
                for t, r in enumerate(mc.records)
            ]
            outputs.append(
                reports.write_rows(
                    out / "records",
                    args.format,
                    ["trial", "reserved_index", "test_outcomes", "sampled_elements",
                     "span_outcomes", "prove_outcome", "accepted"],
                    rec_rows,
                )
            )
        if _should_plot(args) and mc is not None:
            fig_path = out / "simulate.png"
            reports.simulate_figure(
                {
                    "inspection pass": mc.rsi_accept_rate,
                    "reserved span": mc.reserved_span_rate,
                    "prove outcome 1": mc.prove_one_rate,
                    "accepted": mc.accept_rate,
                },
                exact_value,
                fig_path,
            )
            outputs.append(fig_path)
        write_manifest(out, "simulate", config_path=str(args.config),
                       resolved_config=config_to_dict(config), group=group,
                       strategy=row["strategy"], outputs=outputs, started=started)
        print(f"wrote {', '.join(str(p) for p in outputs)}")
    return EXIT_VIOLATION if violation else EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def cmd_bounds(args: argparse.Namespace) -> int:
    m_range = range(args.m_min, args.m_max + 1)
    table = bound_table(m_range, args.p_prove, args.q_test)
    rows = [
        {
            "m": r.m,
            "soundness_8_over_m": r.soundness_8_over_m,
            "klein_bound": r.klein_bound,
            "completeness": r.completeness,
            "p_prove": r.p_prove,
            "q_test": r.q_test,
            "completeness_curve": r.p_prove * r.q_test ** (r.m - 1),
            "gap_value": r.gap_value,
        }
        for r in table
    ]
    best = gap_optimize(args.p_prove, args.q_test, klein_soundness_bound, m_range)
    print(f"best gap {best.gap:.6f} at m={best.m} "
          f"(honest curve {best.completeness_curve:.6f}, cheat bound {best.soundness_curve:.6f})")
    for row in rows[: min(len(rows), 8)]:
        print(f"  m={row['m']:3d}  8/m={row['soundness_8_over_m']:.4f}  "
              f"16/(7(m-1))={row['klein_bound']:.4f}  gap={row['gap_value']:.4f}")
    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        outputs = [reports.write_rows(out / "bounds", args.format, list(rows[0].keys()), rows)]
        gap_row = {"m_star": best.m, "gap": best.gap, "p_prove": args.p_prove, "q_test": args.q_test}
        outputs.append(reports.write_rows(out / "gap", args.format, list(gap_row.keys()), [gap_row]))
        if _should_plot(args):
            fig_path = out / "bounds.png"
            reports.bounds_figure(rows, fig_path)
            outputs.append(fig_path)
        write_manifest(out, "bounds", config_path=None, resolved_config=None, group=None,
                       strategy=None, outputs=outputs, started=started)
        print(f"wrote {', '.join(str(p) for p in outputs)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# adversary


def cmd_adversary(args: argparse.Namespace) -> int:
    if args.config:
        payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
    else:
        payload = {}
    group_ref = args.group or payload.get("group")
    if group_ref is None:
        raise ValueError("adversary needs --group or a config with a group reference")
    group, named = resolve_group(group_ref)
    sub_ref = args.generators.split(",") if args.generators else payload.get("subgroup")
    subgroup = resolve_subgroup(group, named, sub_ref)
    g = resolve_element(group, args.g if args.g is not None else payload["g"])
    if not subgroup.contains(g):
        raise ValueError(f"{group.name_of(g)} is not in the subgroup; cheating is undefined")

    m_lo = args.m_min if args.m_min is not None else int(payload.get("m", 2))
    m_hi = args.m_max if args.m_max is not None else m_lo
    rows = []
    states: dict[int, dict] = {}
    violation = False
    for m in range(m_lo, m_hi + 1):
        config = protocol_config({**payload, "m": m}, args)
        bounds = _applicable_bounds(group, subgroup, g, m)
        if g == group.identity:
            lam = 0.0
            note = "identity query rejected outright"
        else:
            op = build_accept_operator(g, subgroup, config)
            lam, vec = op.lambda_max()
            states[m] = PureState(m, op.dim, vec, dim_cap=config.dim_cap, renormalize=True).to_json_dict()
            note = None
        cap = bounds["bound_8_over_m"]
        if bounds["klein_bound"] is not None:
            cap = min(cap, bounds["klein_bound"])
        margin = cap - lam
        violation = violation or margin < -BOUND_SLACK
        rows.append(
            {
                "m": m,
                "g": group.name_of(g),
                "lambda_max": lam,
                "bound_8_over_m": bounds["bound_8_over_m"],
                "klein_bound": bounds["klein_bound"],
                "margin": margin,
                "bound_ok": margin >= -BOUND_SLACK,
                "note": note,
            }
        )
        print(f"m={m}: optimal cheat {lam:.9f}, tightest bound {cap:.9f}, margin {margin:.9f}")
    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        outputs = [reports.write_rows(out / "adversary", args.format, list(rows[0].keys()), rows)]
        for m, state_payload in states.items():
            path = out / f"optimal_state_m{m}.json"
            reports.write_json(path, state_payload)
            outputs.append(path)
        if _should_plot(args):
            fig_path = out / "adversary.png"
            reports.adversary_figure(rows, fig_path)
            outputs.append(fig_path)
        write_manifest(out, "adversary", config_path=args.config,
                       resolved_config=None, group=group,
                       strategy="optimal adversary sweep", outputs=outputs, started=started)
        print(f"wrote {', '.join(str(p) for p in outputs)}")
    return EXIT_VIOLATION if violation else EXIT_OK


# ---------------------------------------------------------------------------
# appendix


def cmd_appendix(args: argparse.Namespace) -> int:
    rows = []
    worst = 0.0
    for n in range(args.n_min, args.n_max + 1):
        rng = stream(args.seed if args.seed is not None else 0, n)
        for i in range(args.samples):
            inst = random_feasible_instance(n, rng)
            closed = omax_closed_form(inst)
            brute = omax_bruteforce(inst, seed=i)
            residual = brute - closed
            worst = max(worst, abs(residual))
            rows.append(
                {
                    "n": n,
                    "b": inst.b,
                    "l": inst.l,
                    "closed_form": closed,
                    "bruteforce": brute,
                    "residual": residual,
                }
            )
    print(f"{len(rows)} instances, worst |residual| = {worst:.3e} (tolerance {args.tol:g})")
    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        outputs = [reports.write_rows(out / "appendix", args.format,
                                      ["n", "b", "l", "closed_form", "bruteforce", "residual"], rows)]
        if _should_plot(args):
            fig_path = out / "appendix.png"
            reports.appendix_figure(rows, fig_path)
            outputs.append(fig_path)
        write_manifest(out, "appendix", config_path=None, resolved_config=None, group=None,
                       strategy=None, outputs=outputs, started=started)
        print(f"wrote {', '.join(str(p) for p in outputs)}")
    return EXIT_VIOLATION if worst > args.tol else EXIT_OK


# ---------------------------------------------------------------------------
# reproduce-experiment


def _klein_setup():
    group, named = resolve_group("klein")
    s = subgroup_closure(group, [group.index_of("A")])
    sprime = subgroup_closure(group, [group.index_of("AB")])
    alpha = group.index_of("B")
    proof = coset_proof_state(s, alpha)
    proof_prime = coset_proof_state(sprime, alpha)
    return group, s, sprime, proof, proof_prime


def cmd_reproduce_experiment(args: argparse.Namespace) -> int:
    group, s, sprime, proof, proof_prime = _klein_setup()
    noise = None
    if args.visibility is not None or args.fidelity is not None:
        noise = NoiseSpec(
            visibility=args.visibility if args.visibility is not None else 1.0,
            state_fidelity_mix=args.fidelity if args.fidelity is not None else 1.0,
        )
    psi_a = basis_state(group, group.index_of("A"))
    psi_b = basis_state(group, group.index_of("B"))
    multipliers = [group.index_of(x) for x in ("E", "A", "B", "AB")]

    def prob(state: PureState, mult: int, outcome: int, with_noise: bool) -> float:
        out = core_circuit(state, 0, group, mult, noise if with_noise else None)
        return out.p0 if outcome == 0 else out.p1

    panels = []
    cells = []
    # test-channel panels: probability of outcome 0 under one multiplier
    for panel_id, (mult_name, states) in (
        ("a", ("A", [("proof_S", proof), ("proof_Sprime", proof_prime), ("basis_A", psi_a), ("basis_B", psi_b)])),
        ("c", ("AB", [("proof_Sprime", proof_prime), ("proof_S", proof), ("basis_A", psi_a), ("basis_B", psi_b)])),
    ):
        mult = group.index_of(mult_name)
        labels, ideal, model = [], [], []
        for state_name, state in states:
            value = prob(state, mult, 0, with_noise=False)
            row = {
                "panel": panel_id,
                "input_state": state_name,
                "multiplier": mult_name,
                "outcome": 0,
                "ideal_probability": value,
            }
            if noise is not None:
                row["model_probability"] = prob(state, mult, 0, with_noise=True)
                model.append(row["model_probability"])
            cells.append(row)
            labels.append(state_name)
            ideal.append(value)
        panels.append(
            {
                "title": f"panel {panel_id}: test channel, multiplier {mult_name}",
                "labels": labels,
                "ideal": ideal,
                "model": model if noise is not None else None,
                "ylabel": "P(outcome 0)",
            }
        )
    # prove panels: probability of outcome 1 across all multipliers
    for panel_id, (state_name, state) in (
        ("b", ("proof_S", proof)),
        ("d", ("proof_Sprime", proof_prime)),
    ):
        labels, ideal, model = [], [], []
        for mult in multipliers:
            value = prob(state, mult, 1, with_noise=False)
            row = {
                "panel": panel_id,
                "input_state": state_name,
                "multiplier": group.name_of(mult),
                "outcome": 1,
                "ideal_probability": value,
            }
            if noise is not None:
                row["model_probability"] = prob(state, mult, 1, with_noise=True)
                model.append(row["model_probability"])
            cells.append(row)
            labels.append(group.name_of(mult))
            ideal.append(value)
        panels.append(
            {
                "title": f"panel {panel_id}: non-membership outcome, state {state_name}",
                "labels": labels,
                "ideal": ideal,
                "model": model if noise is not None else None,
                "ylabel": "P(outcome 1)",
            }
        )
    # panel order a, b, c, d for the figure
    panels = [panels[0], panels[2], panels[1], panels[3]]

    gap_s = gap_optimize(0.496, 0.949, klein_soundness_bound, range(2, 201))
    gap_sprime = gap_optimize(0.481, 0.980, klein_soundness_bound, range(2, 201))
    gap_rows = [
        {"scenario": "S", "p_prove": 0.496, "q_test": 0.949, "m_star": gap_s.m, "gap": gap_s.gap},
        {"scenario": "Sprime", "p_prove": 0.481, "q_test": 0.980, "m_star": gap_sprime.m, "gap": gap_sprime.gap},
    ]

    print("ideal cell probabilities (panel, input, multiplier, outcome, value):")
    for row in cells:
        extra = f" model={row['model_probability']:.4f}" if "model_probability" in row else ""
        print(f"  {row['panel']}  {row['input_state']:13s} {row['multiplier']:3s} "
              f"outcome {row['outcome']}: {row['ideal_probability']:.4f}{extra}")
    for row in gap_rows:
        print(f"gap scenario {row['scenario']}: m={row['m_star']}, gap={row['gap']:.3f}")

    if args.out is not None:
        started = time.time()
        out = Path(args.out)
        fieldnames = ["panel", "input_state", "multiplier", "outcome", "ideal_probability"]
        if noise is not None:
            fieldnames.append("model_probability")
        outputs = [
            reports.write_rows(out / "experiment", args.format, fieldnames, cells),
            reports.write_rows(out / "gaps", args.format,
                               ["scenario", "p_prove", "q_test", "m_star", "gap"], gap_rows),
        ]
        if _should_plot(args):
            fig_path = out / "experiment.png"
            reports.experiment_figure(panels, fig_path)
            outputs.append(fig_path)
        write_manifest(out, "reproduce-experiment", config_path=None,
                       resolved_config=None if noise is None else {"noise": noise.to_dict()},
                       group=group, strategy=None, outputs=outputs, started=started)
        print(f"wrote {', '.join(str(p) for p in outputs)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="report directory")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnmverify",
        description="Simulate and verify the shallow-circuit group non-membership protocol.",
    )
    parser.add_argument("--version", action="version", version=f"gnmverify {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_group = sub.add_parser("group", help="validate and summarize a group definition")
    p_group.add_argument("group", help="bundled name, JSON path, for example 'klein'")
    p_group.add_argument("--subgroup", action="append",
                         help="extra generator list, comma separated element names")
    _add_common(p_group)
    p_group.set_defaults(func=cmd_group)

    p_sim = sub.add_parser("simulate", help="run the protocol from a config file")
    p_sim.add_argument("--config", required=True)
    engine = p_sim.add_mutually_exclusive_group()
    engine.add_argument("--exact", action="store_true", help="exact engine only")
    engine.add_argument("--monte-carlo", action="store_true", help="Monte Carlo only")
    p_sim.add_argument("--records", action="store_true", help="emit per-trial records")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_bounds = sub.add_parser("bounds", help="bound table and gap optimization")
    p_bounds.add_argument("--m-min", type=int, default=2)
    p_bounds.add_argument("--m-max", type=int, default=40)
    p_bounds.add_argument("--p-prove", type=float, default=0.496)
    p_bounds.add_argument("--q-test", type=float, default=0.949)
    _add_common(p_bounds)
    p_bounds.set_defaults(func=cmd_bounds)

    p_adv = sub.add_parser("adversary", help="optimal cheating value by eigensolving")
    p_adv.add_argument("--config")
    p_adv.add_argument("--group")
    p_adv.add_argument("--generators", help="subgroup generators, comma separated")
    p_adv.add_argument("--g", help="queried element")
    p_adv.add_argument("--m-min", type=int, default=None)
    p_adv.add_argument("--m-max", type=int, default=None)
    _add_common(p_adv)
    p_adv.set_defaults(func=cmd_adversary)

    p_app = sub.add_parser("appendix", help="cyclic-correlation maximization sweep")
    p_app.add_argument("--n-min", type=int, default=2)
    p_app.add_argument("--n-max", type=int, default=8)
    p_app.add_argument("--samples", type=int, default=50)
    p_app.add_argument("--tol", type=float, default=1e-5)
    _add_common(p_app)
    p_app.set_defaults(func=cmd_appendix)

    p_rep = sub.add_parser("reproduce-experiment",
                           help="ideal probabilities and gap numbers of the bundled demonstration")
    p_rep.add_argument("--visibility", type=float, default=None)
    p_rep.add_argument("--fidelity", type=float, default=None)
    _add_common(p_rep)
    p_rep.set_defaults(func=cmd_reproduce_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooLargeForExact as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NotAGroup, StrategyDimensionMismatch, ValueError, KeyError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
