import math
import os
import unittest

import numpy as np

from ca.uqam.info.bprnn import channel
from ca.uqam.info.bprnn.decoding import bp
from ca.uqam.info.bprnn.decoding.bp import WeightSet
from ca.uqam.info.bprnn.errors import GraphMismatchError, WeightFileError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph, read_alist, syndrome


def reference_bp(g, llr, i_max):
    """Plain flooding BP with explicit loops over edges, same clamps."""
    clip = lambda x, bound: max(-bound, min(bound, x))
    alpha = {(n, m): clip(llr[n], bp.MESSAGE_CLAMP) for n in range(g.N) for m in g.var_neighbors[n]}
    for it in range(1, i_max + 1):
        beta = {}
        for m in range(g.M):
            for n in g.check_neighbors[m]:
                product = 1.0
                for k in g.check_neighbors[m]:
                    if k != n:
                        product *= math.tanh(alpha[(k, m)] / 2.0)
                product = clip(product, bp.PRODUCT_CLAMP)
                beta[(n, m)] = clip(2.0 * math.atanh(product), bp.MESSAGE_CLAMP)
        posterior = [llr[n] + sum(beta[(n, m)] for m in g.var_neighbors[n]) for n in range(g.N)]
        hard = [1 if value <= 0 else 0 for value in posterior]
        if syndrome(g, hard).is_zero() or it == i_max:
            return hard, posterior, it
        for n in range(g.N):
            for m in g.var_neighbors[n]:
                extrinsic = sum(beta[(n, k)] for k in g.var_neighbors[n] if k != m)
                alpha[(n, m)] = clip(llr[n] + extrinsic, bp.MESSAGE_CLAMP)


class classe_tests_bp (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")
        self.toy = read_alist(self.data_directory + "/toy_4x2.alist")
        self.rng = np.random.default_rng(7)

    def test_passe_check(self):
        beta = bp.check_pass([2.0, 2.0, 2.0])
        expected = 2.0 * np.arctanh(np.tanh(1.0) ** 2)
        np.testing.assert_allclose(beta, expected, rtol=1e-12)
        self.assertAlmostEqual(float(beta[0]), 1.325, delta=1e-3, msg="Check de degré 3, entrées {2, 2}")

    def test_passe_check_zero_et_signes(self):
        beta = bp.check_pass([0.0, 1.5, -2.0])
        self.assertEqual(beta[1], 0.0, "Un message nul annule le produit")
        self.assertEqual(beta[2], 0.0)
        alpha = self.rng.normal(0.0, 3.0, size=(10_000, 4))
        out = np.array([bp.check_pass(row) for row in alpha[:500]])
        for row, beta_row in zip(alpha[:500], out):
            for j in range(4):
                sign = np.prod(np.sign(np.delete(row, j)))
                self.assertEqual(np.sign(beta_row[j]), sign, "Règle des signes violée")

    def test_passe_donnees(self):
        g = TannerGraph.from_matrix(np.array([[1], [1], [1]]))
        weights = WeightSet(np.full(3, 0.5), np.ones(3))
        alpha = bp.data_pass(g, weights, [1.0], [0.0, 1.0, 1.0])
        self.assertAlmostEqual(float(alpha[0]), 2.0, msg="1 + 0.5 * 2 attendu")
        np.testing.assert_array_equal(bp.data_pass(g, weights, [1.0], np.zeros(3)), np.ones(3))
        zero = WeightSet(np.zeros(3), np.ones(3))
        np.testing.assert_array_equal(bp.data_pass(g, zero, [1.0], [4.0, 5.0, 6.0]), np.ones(3))

    def test_a_posteriori(self):
        g = TannerGraph.from_matrix(np.array([[1]]))
        weights = WeightSet(np.ones(1), np.array([2.0]))
        self.assertAlmostEqual(float(bp.aposteriori(g, weights, [-1.0], [3.0])[0]), 5.0)
        np.testing.assert_array_equal(bp.aposteriori(self.toy, None, [1, 2, 3, 4], np.zeros(6)), [1, 2, 3, 4])

    def test_decision_ferme(self):
        np.testing.assert_array_equal(bp.hard_decision([1.0, 0.0, -1.0]), [0, 1, 1])

    def test_mot_sans_bruit(self):
        result = bp.decode(self.hamming, None, np.full(7, 20.0), 25)
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations, 1, "Une seule itération sur un mot sans bruit")
        self.assertEqual(result.cn_updates, self.hamming.E)

    def test_pire_cas_comptage(self):
        # w~ = 0: the decision stays the channel one, which is not a codeword
        weights = WeightSet(np.ones(self.hamming.E), np.zeros(self.hamming.E))
        llr = np.full(7, 3.0)
        llr[0] = -3.0
        result = bp.decode(self.hamming, weights, llr, 25)
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations, 25)
        self.assertEqual(result.cn_updates, 25 * self.hamming.E)

    def test_premiers_messages_bornes(self):
        signs = np.where(self.rng.random((50, 7)) < 0.2, -1.0, 1.0)
        huge = bp.decode_batch(self.hamming, None, 1000.0 * signs, 1, early_stop=False)
        bounded = bp.decode_batch(self.hamming, None, bp.MESSAGE_CLAMP * signs, 1, early_stop=False)
        np.testing.assert_allclose(huge.llr_final - 1000.0 * signs, bounded.llr_final - bp.MESSAGE_CLAMP * signs,
                                   atol=1e-9, err_msg="Les messages initiaux doivent être bornés à ±30")
        self.assertTrue(np.all(np.isfinite(huge.llr_final)))

    def test_reduction_bp(self):
        params = channel.snr_to_sigma(3.0)
        words = channel.sample_awgn(params, 7, self.rng, size=10_000)
        plain = bp.decode_batch(self.hamming, None, words.llr, 10)
        ones = bp.decode_batch(self.hamming, WeightSet.ones(self.hamming), words.llr, 10)
        np.testing.assert_array_equal(plain.hard, ones.hard)
        np.testing.assert_array_equal(plain.llr_final, ones.llr_final)
        np.testing.assert_array_equal(plain.iterations, ones.iterations)

    def test_oracle_independant(self):
        params = channel.snr_to_sigma(2.0)
        words = channel.sample_awgn(params, 7, self.rng, size=200)
        batch = bp.decode_batch(self.hamming, WeightSet.ones(self.hamming), words.llr, 10)
        for k in range(200):
            hard, posterior, iterations = reference_bp(self.hamming, words.llr[k].tolist(), 10)
            np.testing.assert_array_equal(batch.hard[k], hard)
            np.testing.assert_allclose(batch.llr_final[k], posterior, rtol=1e-9, atol=1e-9)
            self.assertEqual(batch.iterations[k], iterations, f"Nombre d'itérations différent pour le mot {k}")

    def test_convergence_implique_syndrome_nul(self):
        params = channel.snr_to_sigma(1.0)
        words = channel.sample_awgn(params, 7, self.rng, size=1000)
        result = bp.decode_batch(self.hamming, None, words.llr, 15)
        for k in range(len(result)):
            self.assertEqual(bool(result.converged[k]), syndrome(self.hamming, result.hard[k]).is_zero())
        np.testing.assert_array_equal(result.cn_updates, result.iterations * self.hamming.E)

    def test_symetrie_de_signe(self):
        # every check of the Hamming graph has an even degree
        llr = self.rng.normal(2.0, 2.0, size=(100, 7))
        plus = bp.decode_batch(self.hamming, None, llr, 8, early_stop=False)
        minus = bp.decode_batch(self.hamming, None, -llr, 8, early_stop=False)
        np.testing.assert_allclose(minus.llr_final, -plus.llr_final)
        np.testing.assert_array_equal(minus.hard, 1 - plus.hard)

    def test_instantanes(self):
        llr = self.rng.normal(0.5, 2.0, size=(20, 7))
        result = bp.decode_batch(self.hamming, None, llr, 10, snapshot_every=5)
        self.assertEqual(result.snapshots.shape, (20, 2, 7))
        for k in range(20):
            if result.iterations[k] == 10:
                self.assertFalse(np.any(np.isnan(result.snapshots[k])))

    def test_fichier_de_poids(self):
        weights = WeightSet(self.rng.normal(1.0, 0.3, self.toy.E), self.rng.normal(1.0, 0.3, self.toy.E))
        text = bp.write_weights(self.toy, weights)
        self.assertEqual(text.splitlines()[0], "4 2 6")
        back = bp.read_weights(self.toy, text)
        np.testing.assert_array_equal(back.w_data, weights.w_data)
        np.testing.assert_array_equal(back.w_apost, weights.w_apost)

    def test_fichier_de_poids_invalide(self):
        text = bp.write_weights(self.toy, WeightSet.ones(self.toy))
        with self.assertRaises(GraphMismatchError):
            bp.read_weights(self.hamming, text)
        lines = text.splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        with self.assertRaises(WeightFileError):
            bp.read_weights(self.toy, "\n".join(lines))
        with self.assertRaises(GraphMismatchError):
            WeightSet.ones(self.toy).bind(self.hamming)

    def test_poids_hamming_fournis(self):
        weights = bp.load_weights(self.hamming, self.data_directory + "/hamming_weights_damped.txt")
        np.testing.assert_array_equal(weights.w_data, np.full(12, 0.75))

    @unittest.skipUnless(os.path.exists("./data/code2.alist"), "data/code2.alist absent")
    def test_comptage_code2(self):
        g = read_alist("./data/code2.alist")
        best = bp.decode(g, None, np.full(g.N, 20.0), 25)
        self.assertEqual(best.cn_updates, 512)
        llr = np.full(g.N, 5.0)
        llr[0] = -5.0
        worst = bp.decode(g, WeightSet(np.ones(g.E), np.zeros(g.E)), llr, 25)
        self.assertEqual(worst.cn_updates, 12800)


if __name__ == '__main__':
    unittest.main()
