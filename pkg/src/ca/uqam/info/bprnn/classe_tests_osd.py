import itertools
import unittest

import numpy as np

from ca.uqam.info.bprnn.decoding import osd
from ca.uqam.info.bprnn.decoding.osd import candidate_count, osd_reencode, osd_w, sort_reliability, systematize
from ca.uqam.info.bprnn.errors import GraphMismatchError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph, is_codeword, read_alist


def codebook(H):
    n = H.shape[1]
    words = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)
    return words[~np.any((words.astype(np.int64) @ H.T.astype(np.int64)) % 2, axis=1)]


def as_set(words):
    return {tuple(int(b) for b in w) for w in words}


class classe_tests_osd (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        self.toy = read_alist(self.data_directory + "/toy_4x2.alist")
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")
        self.rng = np.random.default_rng(17)

    def test_tri_fiabilite(self):
        np.testing.assert_array_equal(sort_reliability([3.0, -5.0, 1.0]), [1, 0, 2])
        np.testing.assert_array_equal(sort_reliability([2.0, -2.0, 2.0, -2.0]), [0, 1, 2, 3], "Égalités: indice bas")
        llr = self.rng.normal(0.0, 2.0, 20)
        perm = sort_reliability(llr)
        np.testing.assert_array_equal(perm[sort_reliability(llr[perm])], perm)

    def test_systematisation_jouet(self):
        sys = systematize(self.toy, np.arange(4))
        self.assertEqual((sys.rank, sys.K), (2, 2))
        np.testing.assert_array_equal(sys.h_sys, [[1, 0, 1, 0], [1, 1, 0, 1]])
        np.testing.assert_array_equal(sys.perm, [0, 1, 2, 3])

    def test_deja_systematique(self):
        H = np.array([[1, 0, 1, 0], [1, 1, 0, 1]])
        sys = systematize(H, np.arange(4))
        np.testing.assert_array_equal(sys.h_sys, H, "Une matrice déjà systématique ne doit pas changer")

    def test_bloc_identite(self):
        for _ in range(20):
            H = (self.rng.random((6, 12)) < 0.4).astype(np.uint8)
            if not np.any(H):
                continue
            sys = systematize(H, self.rng.permutation(12))
            np.testing.assert_array_equal(sys.h_sys[:, sys.K:], np.eye(sys.rank, dtype=np.uint8))
            self.assertEqual(sorted(sys.perm.tolist()), list(range(12)))
            self.assertLessEqual(sys.rank, 6)

    def test_rang_deficient(self):
        H = np.array([[1, 1, 0, 1], [0, 1, 1, 1], [1, 0, 1, 0]])
        sys = systematize(H, np.arange(4))
        self.assertEqual((sys.rank, sys.K), (2, 2), "La ligne dépendante doit être retirée")

    def test_matrice_nulle(self):
        with self.assertRaises(GraphMismatchError):
            systematize(np.zeros((2, 4), dtype=np.uint8), np.arange(4))
        with self.assertRaises(ValueError):
            systematize(self.toy, [0, 0, 1, 2])

    def test_reencodage(self):
        sys = systematize(self.hamming, sort_reliability(self.rng.normal(size=7)))
        np.testing.assert_array_equal(osd_reencode(sys, np.zeros(sys.K)), np.zeros(7))
        mrb = self.rng.integers(0, 2, size=(10_000, sys.K))
        self.assertTrue(np.all(is_codeword(self.hamming, osd_reencode(sys, mrb))))

    def test_reencodage_mot_de_code(self):
        sys = systematize(self.hamming, self.rng.permutation(7))
        for c in codebook(self.hamming.H):
            np.testing.assert_array_equal(osd_reencode(sys, c[sys.perm[:sys.K]]), c)

    def test_code_preserve(self):
        H = self.hamming.H
        sys = systematize(self.hamming, sort_reliability(self.rng.normal(size=7)))
        every_mrb = np.array(list(itertools.product((0, 1), repeat=sys.K)))
        self.assertEqual(as_set(osd_reencode(sys, every_mrb)), as_set(codebook(H)))

    def test_nombre_de_candidats(self):
        self.assertEqual(candidate_count(64, 1), 65)
        self.assertEqual(candidate_count(4, 1), 5)
        self.assertEqual(candidate_count(4, 2), 11)
        candidates = osd.osd_candidates(self.hamming, self.rng.normal(size=7), np.ones(7), 2)
        self.assertEqual(len(candidates), 11)
        self.assertEqual([len(c.flips) for c in candidates[:5]], [0, 1, 1, 1, 1])

    def test_ordre_invalide(self):
        with self.assertRaises(ValueError):
            osd_w(self.hamming, np.ones(7), np.ones(7), 3)

    def test_sans_bruit(self):
        best = osd_w(self.hamming, np.full(7, 20.0), np.ones(7), 1)
        np.testing.assert_array_equal(best.codeword, np.zeros(7))
        self.assertEqual(best.flips, ())

    def test_osd_complet_egal_ml(self):
        H2 = np.hstack([np.array([[1, 0], [1, 1], [0, 1], [1, 1], [1, 0]], dtype=np.uint8), np.eye(5, dtype=np.uint8)])
        for g in (self.toy, TannerGraph.from_matrix(H2)):
            book = codebook(g.H)
            for _ in range(100):
                y = 1.0 + self.rng.normal(0.0, 0.9, size=g.N)
                llr = 2.0 * y / 0.81
                best = osd_w(g, llr, y, 2)
                expected = book[int(np.argmin(book.astype(np.float64) @ y))]
                np.testing.assert_array_equal(best.codeword, expected)

    def test_score_monotone(self):
        for _ in range(50):
            y = 1.0 + self.rng.normal(0.0, 1.0, size=7)
            llr = 2.0 * y
            scores = [osd_w(self.hamming, llr, y, w).score for w in range(3)]
            self.assertLessEqual(scores[1], scores[0])
            self.assertLessEqual(scores[2], scores[1])

    def test_post_traitement(self):
        y = 1.0 + self.rng.normal(0.0, 1.0, size=7)
        llr = 2.0 * y
        single = osd_w(self.hamming, llr, y, 1).codeword
        np.testing.assert_array_equal(osd.postprocess(self.hamming, np.tile(llr, (4, 1)), y, 1), single)
        soft = self.rng.normal(0.0, 2.0, size=(3, 7))
        chosen = osd.postprocess(self.hamming, soft, y, 1)
        winners = [osd_w(self.hamming, s, y, 1) for s in soft]
        self.assertAlmostEqual(float(chosen @ y), min(w.score for w in winners))

    def test_post_traitement_periodique(self):
        y = np.ones(7)
        snapshots = np.full((2, 7), np.nan)
        snapshots[0] = self.rng.normal(0.0, 2.0, size=7)
        result = osd.periodic_postprocess(self.hamming, snapshots, np.full(7, 10.0), y, 1)
        np.testing.assert_array_equal(result, np.zeros(7), "Les instantanés NaN sont ignorés")


if __name__ == '__main__':
    unittest.main()
