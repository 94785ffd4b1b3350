import numpy as np
import pytest

from threeweight import SolverConfig, solve
from threeweight.graph import INFINITE, STANDARD, CertaintyContradiction
from threeweight.sudoku import (
    OneOn,
    SudokuError,
    SudokuInstance,
    candidate_variables,
    decode,
    encode,
    format_grid,
    grid_is_solution,
    parse,
    read_puzzle,
    verify,
)
from threeweight.ties import TieStreams

from conftest import CORPUS
from oracles import backtrack_solve

CLASSIC = CORPUS / "sudoku" / "classic.sudoku"


def one_on(n, w, seed=0, node=0):
    n = np.atleast_2d(np.asarray(n, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=np.int8))
    ties = TieStreams(seed)
    x, wo = OneOn().minimize(n, w, np.ones_like(n, dtype=bool), np.array([node]), ties, 1.0)
    return x[0].tolist(), wo[0].tolist(), ties.draws


def indicator_vector(instance, grid):
    return np.array([float(grid[r][c] == d) for r, c, d in candidate_variables(instance)])


class TestOneOn:
    def test_greatest_message_wins(self):
        assert one_on([0.9, 0.2, 0.1], [STANDARD] * 3)[:2] == ([1, 0, 0], [STANDARD] * 3)

    def test_certain_on_makes_all_certain(self):
        x, w, _ = one_on([1.0, 0.4, 0.3], [INFINITE, STANDARD, STANDARD])
        assert (x, w) == ([1, 0, 0], [INFINITE] * 3)

    def test_all_but_one_certain_off(self):
        x, w, _ = one_on([0.0, 0.0, 0.2], [INFINITE, INFINITE, STANDARD])
        assert (x, w) == ([0, 0, 1], [INFINITE] * 3)

    def test_certain_off_edge_keeps_certainty(self):
        x, w, _ = one_on([0.0, 0.7, 0.3], [INFINITE, STANDARD, STANDARD])
        assert (x, w) == ([0, 1, 0], [INFINITE, STANDARD, STANDARD])

    def test_certain_off_never_chosen(self):
        x, _, _ = one_on([0.0, 0.1, 0.05], [INFINITE, STANDARD, STANDARD])
        assert x == [0, 1, 0]

    def test_degree_one_is_forced(self):
        assert one_on([0.3], [STANDARD])[:2] == ([1], [INFINITE])

    def test_tie_broken_by_seed(self):
        picks = {tuple(one_on([0.5, 0.5], [STANDARD] * 2, seed=s)[0]) for s in range(20)}
        assert picks == {(1, 0), (0, 1)}
        x, w, draws = one_on([0.5, 0.5], [STANDARD] * 2, seed=3)
        assert one_on([0.5, 0.5], [STANDARD] * 2, seed=3)[0] == x
        assert w == [STANDARD] * 2 and draws == 1

    def test_no_draw_without_tie(self):
        assert one_on([0.5, 0.4], [STANDARD] * 2)[2] == 0

    @pytest.mark.parametrize(
        "n, w",
        [([1.0, 1.0, 0.2], [INFINITE, INFINITE, STANDARD]), ([0.0, 0.0], [INFINITE, INFINITE])],
    )
    def test_contradictions(self, n, w):
        with pytest.raises(CertaintyContradiction):
            one_on(n, w)

    def test_padding_ignored(self):
        n = np.array([[0.2, 0.9, 5.0], [0.3, 0.1, 0.0]])
        w = np.full(n.shape, STANDARD, dtype=np.int8)
        mask = np.array([[True, True, False], [True, True, False]])
        x, _ = OneOn().minimize(n, w, mask, np.array([0, 1]), TieStreams(0), 1.0)
        assert x[mask].tolist() == [0, 1, 1, 0]


class TestEncoding:
    def test_empty_4x4(self):
        prob = encode(SudokuInstance(4))
        assert prob.graph.variable_count == 64
        assert prob.family_sizes() == {"cell": 16, "row": 16, "col": 16, "box": 16}
        assert all(len(node.edges) == 4 for node in prob.graph.left_nodes)

    def test_counts_match_recount(self):
        inst = read_puzzle(CLASSIC)
        prob = encode(inst)
        clues = len(inst.clues)
        assert len(prob.constraints) == 4 * 81 - 4 * clues
        # recount variables directly: open cells times digits not seen among peers
        count = 0
        for r in range(9):
            for c in range(9):
                if (r, c) in inst.clues:
                    continue
                peers = {d for (rr, cc), d in inst.clues.items()
                         if rr == r or cc == c or inst.box(rr, cc) == inst.box(r, c)}
                count += 9 - len(peers)
        assert prob.graph.variable_count == count <= 9 ** 3

    def test_fully_clued_has_no_variables(self):
        grid = backtrack_solve(9, read_puzzle(CLASSIC).clues)
        inst = SudokuInstance.from_grid(grid)
        prob = encode(inst)
        assert prob.graph.variable_count == 0
        report = solve(prob.graph, SolverConfig())
        assert report.converged and report.iterations <= 2
        assert verify(inst, report.solution)

    def test_repeated_clue_rejected(self):
        with pytest.raises(SudokuError):
            encode(SudokuInstance(4, {(0, 0): 1, (0, 3): 1}))

    def test_unplaceable_digit_rejected(self):
        # row 0 needs a 4 but every open cell of row 0 sees a 4
        inst = SudokuInstance(4, {(0, 0): 1, (0, 1): 2, (1, 2): 4, (2, 3): 4})
        with pytest.raises(SudokuError):
            encode(inst)

    @pytest.mark.parametrize("n", [0, 5, 8])
    def test_side_must_be_square(self, n):
        with pytest.raises(SudokuError):
            SudokuInstance(n)


class TestVerify:
    def setup_method(self):
        self.inst = read_puzzle(CLASSIC)
        self.grid = backtrack_solve(9, self.inst.clues)

    def test_solution_accepted(self):
        assert verify(self.inst, indicator_vector(self.inst, self.grid))

    def test_swapped_cells_rejected(self):
        open_cells = [(0, c) for c in range(9) if (0, c) not in self.inst.clues]
        (r, a), (_, b) = open_cells[:2]
        grid = [row[:] for row in self.grid]
        grid[r][a], grid[r][b] = grid[r][b], grid[r][a]
        assert not grid_is_solution(self.inst, grid)
        assert not verify(self.inst, indicator_vector(self.inst, grid))

    def test_all_zeros_rejected(self):
        assert not verify(self.inst, np.zeros(len(candidate_variables(self.inst))))

    def test_wrong_length_rejected(self):
        assert not verify(self.inst, np.zeros(3))


@pytest.mark.parametrize("mode", ["single", "three-weight"])
def test_classic_puzzle_solution(mode):
    inst = read_puzzle(CLASSIC)
    prob = encode(inst)
    report = solve(prob.graph, SolverConfig(mode=mode, seed=1))
    assert report.converged
    assert decode(inst, report.solution) == backtrack_solve(9, inst.clues)


def test_sixteen_by_sixteen():
    inst = read_puzzle(CORPUS / "sudoku" / "16x16" / "h01.sudoku")
    report = solve(encode(inst).graph, SolverConfig(seed=0))
    assert report.converged and verify(inst, report.solution)


class TestFormat:
    def test_parse_and_meta(self):
        inst = parse("# difficulty: easy\n4\n1 . . .\n. . 0 .\n. . . .\n. . . 2\n", name="t")
        assert inst.clues == {(0, 0): 1, (3, 3): 2}
        assert inst.meta == {"difficulty": "easy"}
        assert inst.name == "t"

    def test_round_trip(self):
        inst = read_puzzle(CLASSIC)
        assert parse(format_grid(inst.grid())).clues == inst.clues

    @pytest.mark.parametrize(
        "text",
        ["", "x\n", "4 4\n", "4\n1 2 3 4\n", "4\n1 . . .\n. . . .\n. . . .\n. . . a\n", "4\n5 . . .\n. . . .\n. . . .\n. . . .\n"],
    )
    def test_malformed(self, text):
        with pytest.raises(SudokuError):
            parse(text)


def test_one_on_infinite_emission_small_exhaustive():
    # every incoming certainty pattern on 3 edges that is not contradictory
    for pattern in range(3 ** 3):
        kinds = [(pattern // 3 ** i) % 3 for i in range(3)]  # 0 std, 1 certain off, 2 certain on
        n = [1.0 if k == 2 else 0.0 if k == 1 else 0.3 + 0.1 * i for i, k in enumerate(kinds)]
        w = [INFINITE if k else STANDARD for k in kinds]
        feasible = [
            on for on in range(3)
            if all(not (k == 2 and i != on) and not (k == 1 and i == on) for i, k in enumerate(kinds))
        ]
        if not feasible:
            with pytest.raises(CertaintyContradiction):
                one_on(n, w)
            continue
        x, wo, _ = one_on(n, w)
        for i in range(3):
            if wo[i] == INFINITE:
                assert {float(on == i) for on in feasible} == {x[i]}
        assert x.index(1) in feasible

