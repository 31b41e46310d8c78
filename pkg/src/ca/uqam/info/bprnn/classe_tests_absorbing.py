import os
import unittest
from collections import deque

import numpy as np

from ca.uqam.info.bprnn.graph import absorbing
from ca.uqam.info.bprnn.graph.absorbing import AbsorbingSet, ExtendedType
from ca.uqam.info.bprnn.graph.tanner import TannerGraph, read_alist


def random_graph(n_vars, n_checks, degree, seed):
    rng = np.random.default_rng(seed)
    H = np.zeros((n_checks, n_vars), dtype=np.uint8)
    for n in range(n_vars):
        H[rng.choice(n_checks, size=degree, replace=False), n] = 1
    return TannerGraph.from_matrix(H)


def is_connected(g, A):
    A = set(A)
    start = min(A)
    seen, queue = {start}, deque([start])
    while queue:
        v = queue.popleft()
        for m in g.var_neighbors[v]:
            for u in g.check_neighbors[m]:
                if u in A and u not in seen:
                    seen.add(u)
                    queue.append(u)
    return seen == A


class classe_tests_absorbing (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        # variables a, b, c, d of degree 3; even checks ab ac ad bd cd, odd checks {b} {c}
        self.fig_a = read_alist(self.data_directory + "/absorbing_4_2_5.alist")
        # checks acd bcd ac ad bc bd cd
        self.fig_b = TannerGraph.from_matrix(np.array([
            [1, 0, 1, 1], [0, 1, 1, 1], [1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]]))
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")
        self.graphs = [self.fig_a, self.fig_b, self.hamming,
                       random_graph(14, 7, 3, 1), random_graph(16, 8, 3, 2), random_graph(12, 9, 2, 3)]

    def test_verification_figure_a(self):
        self.assertTrue(absorbing.as_check(self.fig_a, [0, 1, 2, 3]), "L'ensemble 4-(2,5) doit être absorbant")
        self.assertFalse(absorbing.as_check(self.fig_a, [0]), "Une variable seule n'est pas absorbante")

    def test_type_etendu(self):
        self.assertEqual(str(absorbing.extended_type(self.fig_a, [0, 1, 2, 3])), "4-(2,5,(2,5))")
        self.assertEqual(str(absorbing.extended_type(self.fig_b, [0, 1, 2, 3])), "4-(2,5,(0,5,2))")

    def test_invariants_du_type(self):
        g = self.graphs[3]
        for A in absorbing.brute_force(g, 4):
            et = absorbing.extended_type(g, A)
            self.assertEqual(sum(et.pc), et.omega + et.epsilon)
            self.assertEqual(sum(m for d, m in enumerate(et.pc, start=1) if d % 2 == 1), et.omega)
            self.assertEqual(sum(d * m for d, m in enumerate(et.pc, start=1)),
                             sum(g.var_degree(n) for n in A))
            self.assertNotEqual(et.pc[-1], 0, "Zéros de fin non retirés")

    def test_lecture_type_etendu(self):
        et = ExtendedType(4, 2, 5, (0, 5, 2))
        self.assertEqual(absorbing.parse_extended_type(str(et)), et)
        self.assertEqual(absorbing.parse_extended_type("3-(3,3,(3,3))"), ExtendedType(3, 3, 3, (3, 3)))
        with self.assertRaises(ValueError):
            absorbing.parse_extended_type("4-(2,5)")

    def test_expansion_enracinee(self):
        toy = read_alist(self.data_directory + "/toy_4x2.alist")
        expansion = absorbing.rooted_expansion(toy, 0)
        self.assertEqual(expansion.var_layers, ((0,), (1, 3), (2,)))
        self.assertEqual(expansion.check_layers[0], toy.var_neighbors[0])
        self.assertEqual(expansion.reachable(), 4)

    def test_completions(self):
        toy = read_alist(self.data_directory + "/toy_4x2.alist")
        expansion = absorbing.rooted_expansion(toy, 0)
        self.assertEqual(absorbing.completions(toy, expansion, [[0]], 3), [(1,), (3,), (1, 3)])
        self.assertEqual(absorbing.completions(toy, expansion, [[0]], 2, allow_empty=True), [(), (1,), (3,)])
        self.assertEqual(absorbing.completions(toy, expansion, [[0], [1]], 2), [])

    def test_racine_est_le_minimum(self):
        g = self.graphs[4]
        for root in range(g.N):
            found = absorbing.as_dfs(g, root, 4)
            self.assertEqual(len(found), len(set(found)), "Doublons dans as_dfs")
            for A in found:
                self.assertEqual(A.members[0], root)
                self.assertTrue(absorbing.as_check(g, A))

    def test_equivalence_force_brute(self):
        for index, g in enumerate(self.graphs):
            for nu in range(1, min(5, g.N) + 1):
                enumerated = [A for root in range(g.N) for A in absorbing.as_dfs(g, root, nu)]
                expected = absorbing.brute_force(g, nu)
                self.assertEqual(len(enumerated), len(set(enumerated)), f"graphe {index}, nu={nu}: doublons")
                self.assertEqual(set(enumerated), set(expected), f"graphe {index}, nu={nu}: ensembles différents")

    def test_ensembles_connexes(self):
        for g in self.graphs[3:]:
            for nu in range(2, 6):
                connected = {A for root in range(g.N) for A in absorbing.as_dfs(g, root, nu, connected_only=True)}
                expected = {A for A in absorbing.brute_force(g, nu) if is_connected(g, A)}
                self.assertEqual(connected, expected)

    def test_classification(self):
        g = self.graphs[3]
        classes = absorbing.enumerate_all(g, 4)
        self.assertEqual(sum(c.count for c in classes.values()), len(absorbing.brute_force(g, 4)),
                         "La classification doit être une partition")
        for et, entry in classes.items():
            for A in entry.sets:
                self.assertEqual(absorbing.extended_type(g, A), et)
        self.assertEqual(list(classes), sorted(classes), "Classes non triées")

    def test_supports_de_mots_de_code(self):
        classes = absorbing.enumerate_all(self.hamming, 3)
        supports = sum(c.count for c in classes.values() if c.codeword_support)
        self.assertEqual(supports, 7, "Le code de Hamming a 7 mots de code de poids 3")

    def test_echantillon(self):
        g = self.graphs[4]
        full = absorbing.enumerate_all(g, 4)
        sampled = absorbing.enumerate_all(g, 4, sample_size=2, seed=9)
        self.assertEqual({et: c.count for et, c in full.items()}, {et: c.count for et, c in sampled.items()})
        for et, entry in sampled.items():
            self.assertEqual(len(entry.sets), min(2, entry.count))
            self.assertTrue(set(entry.sets) <= set(full[et].sets))

    def test_travailleurs_paralleles(self):
        g = self.graphs[3]
        serial = absorbing.enumerate_all(g, 4)
        parallel = absorbing.enumerate_all(g, 4, workers=2)
        self.assertEqual({et: c.sets for et, c in serial.items()}, {et: c.sets for et, c in parallel.items()})

    def test_fichier_dump(self):
        classes = absorbing.enumerate_all(self.fig_a, 3)
        text = absorbing.write_dump(classes)
        for line in text.splitlines():
            self.assertRegex(line, r"^\d+-\(\d+,\d+,\([\d,]*\)\): \d+( \d+)*$")
        back = absorbing.read_dump(text)
        self.assertEqual({et: c.sets for et, c in back.items()}, {et: c.sets for et, c in classes.items()})

    def test_lignes_resume(self):
        classes = absorbing.enumerate_all(self.fig_a, 4)
        self.assertEqual(absorbing.summary_rows(classes), [[4, "4-(2,5,(2,5))", 1, 0]])

    def test_ensemble_absorbant_trie(self):
        self.assertEqual(AbsorbingSet((5, 1, 3)).members, (1, 3, 5))
        with self.assertRaises(ValueError):
            AbsorbingSet((1, 1))

    @unittest.skipUnless(os.path.exists("./data/code1.alist"), "data/code1.alist absent")
    def test_table_code1(self):
        g = read_alist("./data/code1.alist")
        nu3 = absorbing.enumerate_all(g, 3)
        self.assertEqual((len(nu3), sum(c.count for c in nu3.values())), (1, 164))
        nu4 = absorbing.enumerate_all(g, 4)
        self.assertEqual((len(nu4), sum(c.count for c in nu4.values())), (2, 1452))

    @unittest.skipUnless(os.path.exists("./data/code2.alist"), "data/code2.alist absent")
    def test_table_code2(self):
        g = read_alist("./data/code2.alist")
        nu3 = absorbing.enumerate_all(g, 3)
        self.assertEqual((len(nu3), sum(c.count for c in nu3.values())), (1, 32))
        nu4 = absorbing.enumerate_all(g, 4)
        self.assertEqual((len(nu4), sum(c.count for c in nu4.values())), (6, 944))


if __name__ == '__main__':
    unittest.main()
