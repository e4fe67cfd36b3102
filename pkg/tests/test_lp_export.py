"""LP model construction, the writer, the grammar check, and a solver cross-check.

The cross-check at the bottom re-parses the exported file with a small
parser written here (sharing nothing with the package's reader) and hands
the matrix to scipy's MILP solver; its optimum must match the exact
enumerative solver on the same instance.
"""

from __future__ import annotations

import numpy as np
import pytest

from manoplace import (
    GeneratorConfig,
    OracleBudget,
    OracleStatus,
    build_lp_model,
    check_lp_file,
    export_lp,
    generate_instance,
    solve_exact,
)

from conftest import make_instance

TINY = [[0, 10], [10, 0]]


def tiny_instance():
    return make_instance(TINY, vnf_locs=(1,))


class TestModelCounts:
    # Hand-derived index-set sizes for |P| = 2, |V| = 1 (so |M| = 1, GSO at
    # PoP 0, the VNF at PoP 1):
    #   variables: h (P) + r (P^2) + x (M*P) + y (V*M*P) + z (V*M*P^2)
    #            = 2 + 4 + 2 + 2 + 4 = 14
    #   rows: c2 P, c3 P^2, c4 P, c5 M, c6 V, c7 VMP, c10 MP, c11 MP,
    #         c12 P-1, c13 P(P-1), c14 VM(P-1), c16 VMP^2, c17 P,
    #         c18 VMP(P-1), c19..c21 VMP^2 each = 40 total
    FAMILIES = {
        "c2": 2, "c3": 4, "c4": 2, "c5": 1, "c6": 1, "c7": 2,
        "c10": 2, "c11": 2, "c12": 1, "c13": 2, "c14": 1,
        "c16": 4, "c17": 2, "c18": 2, "c19": 4, "c20": 4, "c21": 4,
    }

    def test_frozen_counts(self):
        model = build_lp_model(tiny_instance())
        assert len(model.variables) == 14
        assert len(model.rows) == 40
        assert model.family_rows == self.FAMILIES

    def test_summary_line(self, tmp_path):
        summary = export_lp(tiny_instance(), tmp_path / "tiny.lp")
        assert summary.line() == "variables=14 constraints=40"
        assert summary.family_rows == self.FAMILIES

    def test_linearization_rows_cover_the_diagonal(self):
        # z_{v,m,p,p} must be pinned to y*r like every other entry, or the
        # capacity row can be bypassed by zeroing the diagonal. Guard the
        # full index set of the pinning families.
        model = build_lp_model(tiny_instance())
        names = {r.name for r in model.rows}
        for fam in ("c19", "c20", "c21"):
            for q in range(2):
                for p in range(2):
                    assert f"{fam}_0_0_{q}_{p}" in names

    def test_gso_row_excluded_from_c12(self):
        model = build_lp_model(tiny_instance())
        c12 = [r.name for r in model.rows if r.name.startswith("c12_")]
        assert c12 == ["c12_1"]

    def test_objective_is_h_plus_x(self):
        model = build_lp_model(tiny_instance())
        assert sorted(model.objective) == [
            (1.0, "h_0"), (1.0, "h_1"), (1.0, "x_0_0"), (1.0, "x_0_1")]


class TestGrammarCheck:
    def test_exported_files_are_clean(self, tmp_path, line3, two_clusters):
        for i, inst in enumerate((tiny_instance(), line3, two_clusters)):
            path = tmp_path / f"m{i}.lp"
            export_lp(inst, path)
            assert check_lp_file(path) == []

    @pytest.mark.parametrize("corrupt, fragment", [
        (lambda t: t.replace(" c2_1:", " c2_0:", 1), "duplicate constraint"),
        (lambda t: t.replace("10 h_1 <= 80", "10 h_9 <= 80"), "not declared"),
        (lambda t: t.replace("Binary\n", "Binary\n q_0\n"), "naming scheme"),
        (lambda t: t.replace("Binary\n", "Binary\n h_0\n"), "duplicate declaration"),
        (lambda t: t.replace("r_0_0 + r_0_1 = 1", "r_0_0 + r_0_1 ="), "right-hand side"),
        (lambda t: t.replace("Subject To\n", ""), "Subject To"),
        (lambda t: t.replace("End", "End\nextra"), "trailing"),
        (lambda t: t.replace("Minimize\n", ""), "Minimize"),
        (lambda t: t.replace(" c5_0: x_0_0 + x_0_1 <= 1\n", " c5_0: x_0_0 + <= 1\n"),
         "expected a variable"),
    ])
    def test_corruptions_are_detected(self, tmp_path, corrupt, fragment):
        path = tmp_path / "tiny.lp"
        export_lp(tiny_instance(), path)
        path.write_text(corrupt(path.read_text()))
        diags = check_lp_file(path)
        assert any(fragment in d for d in diags), diags

    def test_unused_declaration_is_reported(self, tmp_path):
        path = tmp_path / "tiny.lp"
        export_lp(tiny_instance(), path)
        text = path.read_text().replace("Binary\n", "Binary\n z_7_7_7_7\n")
        path.write_text(text)
        diags = check_lp_file(path)
        assert any("never used" in d for d in diags), diags


# ---------------------------------------------------------------------------
# Independent re-parse plus MILP solve


def _parse_lp(path):
    """Minimal reader for the written dialect; independent of the package."""
    lines = [ln.strip() for ln in open(path) if ln.strip()
             and not ln.strip().startswith("\\")]
    # Continuation lines were indented with 6 spaces before strip; rejoin by
    # gluing any line that does not open a section or a named row.
    joined = []
    for ln in lines:
        if (ln in ("Minimize", "Subject To", "Binary", "End")
                or ":" in ln.split(" ", 1)[0] or ln.endswith(":")
                or (joined and joined[-1] in ("Binary",))
                and ":" not in ln):
            joined.append(ln)
        elif joined and joined[-1] not in ("Minimize", "Subject To", "Binary", "End") \
                and ":" not in ln:
            joined[-1] += " " + ln
        else:
            joined.append(ln)

    section = None
    objective = None
    rows = []
    binaries = []
    for ln in joined:
        if ln in ("Minimize", "Subject To", "Binary", "End"):
            section = ln
            continue
        if section == "Minimize":
            objective = ln.split(":", 1)[1]
        elif section == "Subject To":
            name, rest = ln.split(":", 1)
            for sense in ("<=", ">=", "="):
                if sense in rest:
                    expr, rhs = rest.split(sense, 1)
                    rows.append((name.strip(), expr, sense, float(rhs)))
                    break
        elif section == "Binary":
            binaries.extend(ln.split())

    def terms(expr):
        out = {}
        sign = 1.0
        coef = None
        for tok in expr.replace("+", " + ").replace("-", " - ").split():
            if tok == "+":
                sign, coef = 1.0, None
            elif tok == "-":
                sign, coef = -1.0, None
            else:
                try:
                    coef = float(tok)
                except ValueError:
                    out[tok] = out.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
                    sign, coef = 1.0, None
        return out

    return terms(objective), [(n, terms(e), s, r) for n, e, s, r in rows], binaries


def _solve_lp(path):
    from scipy.optimize import Bounds, LinearConstraint, milp

    objective, rows, binaries = _parse_lp(path)
    index = {name: i for i, name in enumerate(binaries)}
    c = np.zeros(len(binaries))
    for name, coef in objective.items():
        c[index[name]] = coef
    a = np.zeros((len(rows), len(binaries)))
    lb = np.full(len(rows), -np.inf)
    ub = np.full(len(rows), np.inf)
    for i, (_name, expr, sense, rhs) in enumerate(rows):
        for name, coef in expr.items():
            a[i][index[name]] = coef
        if sense in ("<=", "="):
            ub[i] = rhs
        if sense in (">=", "="):
            lb[i] = rhs
    res = milp(c=c, constraints=LinearConstraint(a, lb, ub),
               integrality=np.ones(len(binaries)), bounds=Bounds(0, 1))
    return res


class TestSolverCrossCheck:
    def instances(self, line3, two_clusters):
        yield line3
        yield two_clusters
        for seed in (0, 1, 2):
            yield generate_instance(GeneratorConfig(pop_count=4, vnf_count=5,
                                                    seed=seed))

    def test_milp_matches_exact_solver(self, tmp_path, line3, two_clusters):
        for i, inst in enumerate(self.instances(line3, two_clusters)):
            path = tmp_path / f"x{i}.lp"
            export_lp(inst, path)
            res = _solve_lp(path)
            oracle = solve_exact(inst, OracleBudget())
            assert oracle.status is OracleStatus.OPTIMAL
            assert res.success, res.message
            assert round(res.fun) == oracle.objective, f"instance {i}"

    def test_milp_agrees_on_infeasibility(self, tmp_path):
        inst = make_instance([[0, 200], [200, 0]], vnf_locs=(1,))
        path = tmp_path / "inf.lp"
        export_lp(inst, path)
        res = _solve_lp(path)
        assert not res.success
        oracle = solve_exact(inst, OracleBudget())
        assert oracle.status is OracleStatus.INFEASIBLE
