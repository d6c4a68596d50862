"""One test per acceptance criterion.  Each test records its sub-checks; the
terminal summary prints one pass/fail line per criterion.  Expected values are
the printed ones; nothing is loosened to make a sub-check pass."""

import subprocess
import sys
from fractions import Fraction

from k3lab import fibration as fib
from k3lab import lattice as lat
from k3lab import monodromy as mono
from k3lab import period as per
from k3lab import pfaffian as pf
from k3lab.data import load
from k3lab.exactcore import NOT_DIVISIBLE, exact_divide, format_poly, parse_poly, proportional
from k3lab.polytope import LatticePolytope3, check_fano, check_reflexive_terminal
from k3lab.suite import ERRATUM, FAIL, Options, run_suite


def _finish(criterion):
    assert criterion.passed, "; ".join(criterion.failures())


def test_c1_polytopes(criterion):
    fx = load("polytopes.json")
    fano = []
    for name in ("P1", "P2", "P3", "P4", "P5"):
        p = LatticePolytope3.from_columns(fx[name])
        conds = check_reflexive_terminal(p)
        criterion.check(f"{name} (i)-(iii)", all(conds.values()), str(conds))
        if check_fano(p):
            fano.append(name)
    criterion.check("Fano set", fano == ["P2", "P3", "P4", "P5"], str(fano))
    _finish(criterion)


FIBERS = {"1": "I9+I*3+6I1", "2": "I*1+I11+6I1", "3": "I10+I*2+6I1", "3b": "I9+I9+6I1"}


def _sorted_config(text):
    return sorted(text.split("+"))


def _quotient(printed, derived):
    ring = fib.union_ring(printed.ring, derived.ring)
    q = exact_divide(printed.to_ring(ring), derived.to_ring(ring))
    if q is NOT_DIVISIBLE:
        return "printed is not a polynomial multiple of derived"
    return f"printed = ({format_poly(q)}) * derived"


def test_c2_fibrations(criterion):
    for key, want in FIBERS.items():
        fd = fib.load_family(key)
        k = fib.depress_cubic(fd.weierstrass)
        kinf = fib.to_infinity_chart(k, fd.infinity_var)
        conf = fib.analyze_fibration(k, kinf, fib.default_sample(key), fd.lambda_poly)
        criterion.check(f"{key} fibres", _sorted_config(str(conf)) == _sorted_config(want), f"got {conf}, want {want}")
        criterion.check(f"{key} Euler sum", conf.euler_sum() == 24, str(conf.euler_sum()))
        comps = fib.printed_comparisons(fd)
        for name in ("D0", "Dinf"):
            c, derived = comps[name]
            detail = f"printed = {c} * derived" if c is not None else _quotient(fd.printed[name], derived)
            criterion.check(f"{key} {name}", c is not None and c != 0, detail)
    for key in ("1", "2"):
        fd = fib.load_family(key)
        r = fib.verify_birational(fd.surface, fd.phi, fib.target_equation(fd))
        criterion.check(f"{key} birational (printed map)", r.passed, r.witness or "lands on the model")
    for rep in run_suite("fibration", Options(families=("3", "3b"))):
        if rep.id.endswith(".birational"):
            criterion.check(rep.id, rep.status != FAIL, rep.status)
            criterion.note(rep.id, f"{rep.status} ({rep.witness})")
    _finish(criterion)


def test_c3_lattices(criterion):
    fx = load("lattices.json")

    def det(spec):
        return lat.determinant(lat.build_gram(spec))

    for j in ("1", "2", "3"):
        d = lat.determinant(lat.GramMatrix(fx[f"M{j}"]))
        criterion.check(f"det M{j} = -9", d == -9, str(d))
    for name, want in (("T2", -44), ("T3", -40), ("L3'", -36)):
        d = det(lat.SPECS[name])
        criterion.check(f"det {name} = {want}", d == want, f"got {d}")
    for name, want in (("L1~(a1)", 12), ("L1~(a4)", -30), ("L1~(a7)", 6), ("L2~", -38),
                       ("L3'~(RP=0)", -16), ("L3'~(RP=1)", -112)):
        d = det(lat.contradiction_spec(name))
        criterion.check(f"det {name} = {want}", d == want, f"got {d}")
    vals, poly = lat.tilde_determinant_scan(lat.torsion_spec)
    want = [(k, -72 * (1 + k + k * k)) for k in range(-3, 4)]
    criterion.check("det T1~ = -72(1+k+k^2), k in -3..3", vals == want,
                    f"nearest reconstruction interpolates to {[str(c) for c in poly]} (low to high)")
    for j in ("1", "2", "3"):
        N = lat.direct_sum(fx["E8"], fx["E8"], fx["NS_tail"][j])
        criterion.check(f"U{j}^t M{j} U{j} canonical", lat.verify_congruence(lat.GramMatrix(fx[f"M{j}"]), fx[f"U{j}"], N))
        sm = lat.signature(lat.GramMatrix(fx[f"M{j}"]))
        sa = lat.signature(lat.GramMatrix(fx[f"A{j}"]))
        criterion.check(f"signatures family {j}", (sm, sa) == ((1, 17), (2, 2)), f"{sm}, {sa}")
        dm = lat.discriminant_group(lat.GramMatrix(fx[f"M{j}"]))
        da = lat.discriminant_group(lat.GramMatrix(fx[f"A{j}"]))
        criterion.check(f"discriminant groups family {j}", dm == da, f"{dm} vs {da}")
    _finish(criterion)


def test_c4_periods(criterion):
    ops = load("operators.json")
    for fam in (1, 2, 3):
        s = per.period_series(fam, 14)
        reps = [per.annihilation_report(op, s) for op in per.recurrence_operators(per.PRINTED_FORMULAS[fam])]
        criterion.check(f"recurrence operators family {fam} at N=14", all(r.passed for r in reps),
                        "; ".join(map(str, reps)))
    for fam, name in (("1", "L1_prop"), ("2", "L1_thm"), ("2", "L3_thm")):
        r = per.annihilation_report(per.ThetaOperator.parse(ops[fam][name]), per.period_series(int(fam), 12))
        criterion.check(f"printed {name} family {fam} at N=12", r.passed, str(r))
    first = {r.id: (r.status, r.witness) for r in run_suite("periods")}
    second = {r.id: (r.status, r.witness) for r in run_suite("periods")}
    for rid in ["periods.1.printed.L2_prop"] + [f"periods.3.printed.{n}" for n in ("L1_prop", "L2_prop", "L1_thm", "L3_thm")]:
        status, witness = first[rid]
        criterion.check(f"{rid} erratum with first failing coefficient",
                        status == ERRATUM and "first failure at" in witness and first[rid] == second[rid], status)
    for fam, name in ((1, "L1_prop"), (2, "L1_thm")):
        found = per.find_annihilators(per.period_series(fam, 14), 2, 1)
        op = per.ThetaOperator.parse(ops[str(fam)][name])
        scalar = [per.proportional_ops(f, op) for f in found]
        criterion.check(f"search recovers {name} family {fam}", per.in_span(op, found),
                        f"basis of {len(found)}; proportional to a basis element: {any(c is not None for c in scalar)}")
    r = per.f4_factorization_check(8)
    criterion.check("F4 factorisation at N=8", r.passed, str(r))
    _finish(criterion)


LOCI = {
    "1": "729 l^2 - 54 l (27 m - 1) + (1 + 27 m)^2",
    "2": "l^2 (1 + 27 l)^2 - 2 l m (1 + 189 l) + (1 + 576 l) m^2 - 256 m^3",
    "3": "729 l^2 - (4 m - 1)^3 + 54 l (1 + 12 m)",
}
UNDEFINED = {"2": ("A", 3, 3), "3": ("B", 3, 3)}


def test_c5_pfaffian(criterion):
    fx = load("pfaffians.json")
    for fam in ("1", "2", "3"):
        c = pf.family_pfaffian(fam)
        v = pf.verify_integrability(c)
        criterion.check(f"integrability family {fam}", v is None, str(v) if v else "exact identity")
        f = pf.verify_on_series(c, per.family_laurent_series(fam, 14))
        criterion.check(f"series family {fam} at N=14", f is None, str(f) if f else "")
        cand = pf.family_candidates(fx[fam])
        criterion.check(f"t{fam} is the printed locus", proportional(cand["t"], parse_poly(LOCI[fam], pf.RING)) is not None)
        locus = pf.essential_locus(pf.family_generators(fam, "derived"), cand)
        criterion.check(f"singular locus family {fam}", locus == ["l", "m", "t"], str(locus))
        _, rows = pf.compare_with_printed(c, fx[fam])
        status = {(r.which, r.i, r.j): r.status for r in rows}
        if fam in UNDEFINED:
            criterion.check(f"r{fam} entry undefined-in-paper", status[UNDEFINED[fam]] == "undefined-in-paper")
        others = [k for k, s in status.items() if k != UNDEFINED.get(fam)]
        criterion.check(f"family {fam} other entries classified",
                        all(status[k] in ("match", "mismatch") for k in others),
                        ", ".join(f"{w}{i + 1}{j + 1}" for (w, i, j) in others if status[(w, i, j)] == "mismatch")
                        or "all match")
    _finish(criterion)


def test_c6_monodromy(criterion):
    scalings = ((2, 0), (-1, 0), (0, 1), (3, -5), (Fraction(1, 7), Fraction(2, 3)))
    for j in ("1", "2", "3"):
        Q = mono.QuadraticSpace.of_family(j)
        ref = mono.stored_reference(j)
        gs = mono.search_PO(Q, 2)
        criterion.note(f"A{j} members with entries in [-2, 2]", f"{len(gs)}" + ("" if len(gs) >= 10 else " (fewer than 10)"))
        closed = all(mono.in_PO(Q, mono.inverse(g)) for g in gs) and all(
            mono.in_PO(Q, lat.matmul(g, h)) for g in gs for h in gs)
        criterion.check(f"closure and inverse A{j}", closed)
        eps = {g: mono.epsilon(Q, g, ref) for g in gs}
        criterion.check(f"epsilon multiplicative A{j}",
                        all(mono.epsilon(Q, lat.matmul(g, h), ref) == eps[g] * eps[h] for g in gs for h in gs))
        p = ref.point
        criterion.check(f"orientation under rescaling A{j}",
                        all(mono.component_orientation(Q, p.scaled(a, b), ref) == 1 for a, b in scalings)
                        and mono.component_orientation(Q, p.conjugate(), ref) == -1)
    _finish(criterion)


def test_c7_determinism(criterion):
    cmd = [sys.executable, "-m", "k3lab.cli", "verify", "all", "--format", "json"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    criterion.check("exit code 0", a.returncode == 0 and b.returncode == 0, f"{a.returncode}, {b.returncode}")
    criterion.check("identical bytes", a.stdout == b.stdout and len(a.stdout) > 0, f"{len(a.stdout)} bytes")
    _finish(criterion)
