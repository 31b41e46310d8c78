import os
import unittest
from collections import Counter

import numpy as np

from ca.uqam.info.bprnn.errors import AlistFormatError, GraphMismatchError
from ca.uqam.info.bprnn.graph.tanner import (TannerGraph, bfs_layers, count_weights, girth_and_multiplicity,
                                             graph_summary, is_codeword, parse_alist, read_alist, syndrome,
                                             to_matrix, write_alist)


def random_graph(n_vars, n_checks, degree, seed):
    rng = np.random.default_rng(seed)
    H = np.zeros((n_checks, n_vars), dtype=np.uint8)
    for n in range(n_vars):
        H[rng.choice(n_checks, size=degree, replace=False), n] = 1
    return TannerGraph.from_matrix(H)


def cycle_lengths(g):
    """Every simple cycle, walked from its smallest variable-node in both directions."""
    lengths = Counter()

    def extend(start, var, used_vars, used_checks, length):
        for m in g.var_neighbors[var]:
            if m in used_checks:
                continue
            for u in g.check_neighbors[m]:
                if u == start and length > 0:
                    lengths[length + 2] += 1
                elif u > start and u not in used_vars:
                    extend(start, u, used_vars | {u}, used_checks | {m}, length + 2)

    for start in range(g.N):
        extend(start, start, {start}, frozenset(), 0)
    return {length: count // 2 for length, count in lengths.items()}


class classe_tests_tanner (unittest.TestCase):

    # set-up
    def setUp(self):
        self.data_directory = "./data"
        self.toy = read_alist(self.data_directory + "/toy_4x2.alist")
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")

    # la matrice jouet H = [[1,1,0,1],[0,1,1,1]]
    def test_lecture_alist(self):
        self.assertEqual((self.toy.N, self.toy.M, self.toy.E), (4, 2, 6), "Mauvaises dimensions du graphe jouet")
        self.assertEqual(self.toy.var_neighbors[1], (0, 1), "Voisins de la variable 2 incorrects")
        self.assertEqual(self.toy.check_neighbors[0], (0, 1, 3), "Voisins du check 1 incorrects")
        np.testing.assert_array_equal(to_matrix(self.toy), [[1, 1, 0, 1], [0, 1, 1, 1]])

    def test_ordre_canonique_des_aretes(self):
        g = self.toy
        keys = list(zip(g.edge_var.tolist(), g.edge_check.tolist()))
        self.assertEqual(keys, sorted(keys), "Les arêtes ne sont pas en ordre canonique")
        for e, key in enumerate(keys):
            self.assertEqual(g.edge_index[key], e, "edge_index n'est pas une bijection")
        self.assertEqual(sum(len(c) for c in g.var_neighbors), g.E)
        self.assertEqual(sum(len(v) for v in g.check_neighbors), g.E)

    def test_from_matrix_equivalent(self):
        g = TannerGraph.from_matrix(np.array([[1, 1, 0, 1], [0, 1, 1, 1]]))
        self.assertEqual(g, self.toy, "from_matrix et l'alist ne donnent pas le même graphe")

    def test_ecriture_relecture_alist(self):
        for g in (self.toy, self.hamming):
            self.assertEqual(parse_alist(write_alist(g)), g, "write_alist ne se relit pas à l'identique")

    def test_syndrome(self):
        self.assertFalse(np.any(syndrome(self.toy, [0, 0, 0, 0]).bits), "Le mot nul doit avoir un syndrome nul")
        np.testing.assert_array_equal(syndrome(self.toy, [1, 0, 0, 0]).bits, [1, 0])
        self.assertTrue(syndrome(self.hamming, [1, 1, 1, 1, 1, 1, 1]).is_zero(), "Le mot tout-un est un mot de code")
        batch = np.array([[0, 0, 0, 0], [1, 0, 0, 0]])
        np.testing.assert_array_equal(is_codeword(self.toy, batch), [True, False])

    def test_syndrome_mauvaise_longueur(self):
        with self.assertRaises(GraphMismatchError):
            syndrome(self.toy, [0, 0, 0])

    def test_maille_cycle_unique(self):
        info = girth_and_multiplicity(TannerGraph.from_matrix(np.array([[1, 1], [1, 1]])))
        self.assertEqual(tuple(info), (4, 1), "H = [[1,1],[1,1]] contient un seul 4-cycle")

    def test_maille_hamming(self):
        # each pair of the three checks shares exactly two variables
        self.assertEqual(tuple(girth_and_multiplicity(self.hamming)), (4, 3))

    def test_maille_contre_enumeration(self):
        graphs = [random_graph(4 + seed % 7, 3 + seed % 4, 2 + seed % 2, seed) for seed in range(60)]
        graphs += [random_graph(16, 10, 2, 100), random_graph(16, 12, 2, 101)]
        for g in graphs:
            cycles = cycle_lengths(g)
            expected = (min(cycles), cycles[min(cycles)]) if cycles else (None, 0)
            self.assertEqual(tuple(girth_and_multiplicity(g)), expected,
                             f"Maille erronée pour H = {g.H.tolist()}")

    def test_graphe_sans_cycle(self):
        info = girth_and_multiplicity(TannerGraph.from_matrix(np.array([[1, 1, 0], [0, 1, 1]])))
        self.assertFalse(info.has_cycle(), "Un arbre n'a pas de cycle")
        self.assertEqual(info.count, 0)

    def test_nombre_de_poids(self):
        self.assertEqual(count_weights(self.toy), 12, "2E poids attendus pour la matrice jouet")

    def test_resume_graphe(self):
        self.assertEqual(graph_summary(self.toy), [4, 2, 6, 4, 1])

    def test_couches_bfs(self):
        var_layers, check_layers = bfs_layers(self.toy, 0)
        self.assertEqual(var_layers, [[0], [1, 3], [2]])
        self.assertEqual(check_layers, [[0], [1]])

    def test_erreurs_de_format(self):
        cases = {
            "4\n": 1,
            "4 2\n2 3\n1 2 1\n": 3,
            "4 2\n2 3\n1 2 1 2\n3 3\n1 0\n1 2\n2 0\n1 2\n1 2 4\n2 3 5\n": 10,
            "4 2\n2 3\n1 2 1 2\n3 3\n1 0\n1 1\n2 0\n1 2\n1 2 4\n2 3 4\n": 6,
            "4 2\n2 3\n1 2 1 2\n3 3\n1 0\n1 2\n2 0\n1 2\n1 2 4\n1 3 4\n": 10,
        }
        for text, line_number in cases.items():
            with self.assertRaises(AlistFormatError) as raised:
                parse_alist(text)
            self.assertEqual(raised.exception.line_number, line_number, f"Mauvais numéro de ligne pour {text!r}")

    # Code-1: N=64, M=32, girth 6 with multiplicity 164
    @unittest.skipUnless(os.path.exists("./data/code1.alist"), "data/code1.alist absent")
    def test_code1(self):
        g = read_alist("./data/code1.alist")
        self.assertEqual((g.N, g.M, g.E), (64, 32, 192))
        self.assertEqual(tuple(girth_and_multiplicity(g)), (6, 164))
        self.assertEqual(count_weights(g), 384)

    @unittest.skipUnless(os.path.exists("./data/code2.alist"), "data/code2.alist absent")
    def test_code2(self):
        g = read_alist("./data/code2.alist")
        self.assertEqual((g.N, g.M, g.E), (128, 64, 512))
        self.assertEqual(tuple(girth_and_multiplicity(g)), (6, 2336))
        self.assertEqual(count_weights(g) * 10, 10240)


if __name__ == '__main__':
    unittest.main()
