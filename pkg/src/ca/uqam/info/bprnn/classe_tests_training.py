import math
import unittest

import numpy as np

from ca.uqam.info.bprnn import channel
from ca.uqam.info.bprnn.decoding import bp, training
from ca.uqam.info.bprnn.decoding.bp import WeightSet
from ca.uqam.info.bprnn.decoding.training import (ClassSampler, Gradient, RmsPropState, TrainConfig, backward,
                                                  forward_unrolled, loss, rmsprop_step, train)
from ca.uqam.info.bprnn.errors import ConfigError, TrainingError
from ca.uqam.info.bprnn.graph import absorbing
from ca.uqam.info.bprnn.graph.tanner import read_alist
from ca.uqam.info.bprnn.harness import wilson_interval


class classe_tests_training (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")
        self.rng = np.random.default_rng(11)

    def _random_weights(self):
        E = self.hamming.E
        return WeightSet(self.rng.uniform(0.6, 1.4, E), self.rng.uniform(0.6, 1.4, E))

    def test_perte(self):
        self.assertAlmostEqual(loss(np.zeros(7)), math.log(2.0), places=12)
        self.assertAlmostEqual(loss([-1.0, 1.0]), 0.813262, places=6, msg="(softplus(1) + softplus(-1)) / 2")
        self.assertLess(loss(np.full(7, 200.0)), 1e-80)
        self.assertTrue(np.isfinite(loss(np.full(7, -1e4))), "La perte doit rester finie")

    def test_deroulement_identique_au_decodage(self):
        weights = self._random_weights()
        llr = self.rng.normal(2.0, 2.0, size=(50, 7))
        _, posterior = forward_unrolled(self.hamming, weights, llr, 6)
        result = bp.decode_batch(self.hamming, weights, llr, 6, early_stop=False)
        np.testing.assert_array_equal(posterior, result.llr_final)

    def test_deroulement_llr_satures(self):
        weights = self._random_weights()
        llr = 500.0 * np.sign(self.rng.normal(1.0, 1.0, size=(20, 7)))
        _, posterior = forward_unrolled(self.hamming, weights, llr, 4)
        result = bp.decode_batch(self.hamming, weights, llr, 4, early_stop=False)
        np.testing.assert_array_equal(posterior, result.llr_final)
        self.assertTrue(np.all(np.isfinite(posterior)))

    def test_gradient_une_iteration(self):
        weights = self._random_weights()
        llr = self.rng.normal(2.0, 2.0, size=(1, 7))
        trace, posterior = forward_unrolled(self.hamming, weights, llr, 1)
        gradient = backward(trace, self.hamming, weights)
        g = self.hamming
        sigmoid = 1.0 / (1.0 + np.exp(posterior[0]))
        expected = -(1.0 / g.N) * sigmoid[g.edge_var] * trace.beta_last[0]
        np.testing.assert_allclose(gradient.w_apost, expected, rtol=1e-12)
        np.testing.assert_array_equal(gradient.w_data, np.zeros(g.E), "Pas de passe de données en une itération")

    def test_gradient_differences_finies(self):
        g = self.hamming
        step = 1e-5
        for trial in range(5):
            weights = self._random_weights()
            llr = self.rng.normal(1.5, 2.0, size=(4, 7))
            trace, _ = forward_unrolled(g, weights, llr, 3)
            gradient = backward(trace, g, weights)
            for e in range(g.E):
                for name in ("w_data", "w_apost"):
                    plus = {"w_data": np.array(weights.w_data), "w_apost": np.array(weights.w_apost)}
                    minus = {"w_data": np.array(weights.w_data), "w_apost": np.array(weights.w_apost)}
                    plus[name][e] += step
                    minus[name][e] -= step
                    f_plus = training.evaluate_loss(g, WeightSet(**plus), llr, 3)
                    f_minus = training.evaluate_loss(g, WeightSet(**minus), llr, 3)
                    numeric = (f_plus - f_minus) / (2 * step)
                    exact = getattr(gradient, name)[e]
                    self.assertLess(abs(exact - numeric), 1e-7 + 1e-4 * abs(numeric),
                                    f"essai {trial}, {name}[{e}]: {exact} contre {numeric}")

    def test_rmsprop_premier_pas(self):
        E = self.hamming.E
        state = RmsPropState.zeros(E)
        updated = rmsprop_step(WeightSet.ones(self.hamming), Gradient(np.ones(E), np.ones(E)), state)
        np.testing.assert_allclose(updated.w_data - 1.0, -1e-3 / (math.sqrt(0.1) + 1e-7), rtol=1e-12)
        self.assertAlmostEqual(float(updated.w_apost[0] - 1.0), -3.1623e-3, delta=1e-7)

    def test_rmsprop_gradient_nul(self):
        E = self.hamming.E
        weights = self._random_weights()
        updated = rmsprop_step(weights, Gradient(np.zeros(E), np.zeros(E)), RmsPropState.zeros(E))
        np.testing.assert_array_equal(updated.w_data, weights.w_data)
        np.testing.assert_array_equal(updated.w_apost, weights.w_apost)

    def test_rmsprop_regime_stationnaire(self):
        E = self.hamming.E
        state = RmsPropState.zeros(E)
        weights = WeightSet.ones(self.hamming)
        gradient = Gradient(np.full(E, 0.3), np.full(E, 0.3))
        for _ in range(200):
            before = weights.w_data[0]
            weights = rmsprop_step(weights, gradient, state)
        self.assertAlmostEqual(before - weights.w_data[0], 1e-3, delta=1e-6)

    def test_config_invalide(self):
        with self.assertRaises(ConfigError):
            TrainConfig(snr_db=4.0, i_train=0)
        with self.assertRaises(ConfigError):
            TrainConfig(snr_db=4.0, learning_rate=0.0)

    def test_classe_vide(self):
        cfg = TrainConfig(snr_db=4.0, class_label="3-(3,3,(3,3))", batch_size=4, n_batches=1, epochs=1)
        with self.assertRaises(TrainingError):
            train(self.hamming, cfg, [], self.rng)
        with self.assertRaises(TrainingError, msg="Une classe sans ses ensembles ne doit pas devenir du bruit"):
            train(self.hamming, cfg, None, self.rng)

    def test_echantillonneur_de_classe(self):
        sampler = ClassSampler(7, [(0, 2), (4, 6)])
        words = sampler.draw(channel.snr_to_sigma(3.0), 100, self.rng)
        for row in words.y:
            self.assertIn(channel.error_set(row), ({0, 2}, {4, 6}), "Erreurs hors de la classe")

    def test_determinisme(self):
        cfg = TrainConfig(snr_db=3.0, class_label="2-pairs", batch_size=32, n_batches=3, epochs=2,
                          i_train=3, micro_batch=16)
        sets = [(0, 2), (4, 6)]
        first, report = train(self.hamming, cfg, sets, np.random.default_rng(5))
        second, _ = train(self.hamming, cfg, sets, np.random.default_rng(5))
        np.testing.assert_array_equal(first.w_data, second.w_data)
        np.testing.assert_array_equal(first.w_apost, second.w_apost)
        self.assertEqual(len(report.epoch_losses), 2)
        self.assertEqual(len(report.history), 6)
        self.assertEqual(report.to_csv().splitlines()[0], "epoch,batch,loss")

    def test_micro_lots_sans_effet(self):
        weights = self._random_weights()
        llr = self.rng.normal(1.5, 2.0, size=(24, 7))
        whole = training.batch_gradient(self.hamming, weights, llr, 3, 24)
        sliced = training.batch_gradient(self.hamming, weights, llr, 3, 5)
        self.assertAlmostEqual(whole[0], sliced[0], places=12)
        np.testing.assert_allclose(whole[1].w_data, sliced[1].w_data, rtol=1e-10, atol=1e-15)
        np.testing.assert_allclose(whole[1].w_apost, sliced[1].w_apost, rtol=1e-10, atol=1e-15)

    def test_entrainement_reduit_la_perte(self):
        sets = [(2,), (6,)]
        cfg = TrainConfig(snr_db=2.0, class_label="single", batch_size=256, n_batches=30, epochs=1,
                          i_train=5, learning_rate=5e-3, micro_batch=256)
        trained, _ = train(self.hamming, cfg, sets, np.random.default_rng(3))
        held_out = ClassSampler(7, sets).draw(channel.snr_to_sigma(2.0), 4096, np.random.default_rng(99))
        before = training.evaluate_loss(self.hamming, WeightSet.ones(self.hamming), held_out.llr, 5)
        after = training.evaluate_loss(self.hamming, trained, held_out.llr, 5)
        self.assertLess(after, before, "L'entraînement doit battre BP sur sa propre classe")

    def test_gain_sur_classe_piegeante(self):
        # ring of four variables, each with a degree-7 check to outside bits
        g = read_alist(self.data_directory + "/ring_trap_28_8.alist")
        ring = (0, 1, 2, 3)
        self.assertTrue(absorbing.as_check(g, ring), "L'anneau doit être un ensemble absorbant")
        cfg = TrainConfig(snr_db=1.0, class_label="4-ring", batch_size=128, n_batches=100, epochs=1,
                          i_train=1, learning_rate=0.05, micro_batch=128)
        trained, _ = train(g, cfg, [ring], np.random.default_rng(3))
        words = ClassSampler(g.N, [ring]).draw(channel.snr_to_sigma(1.0), 10_000, np.random.default_rng(99))
        failures = {}
        for name, weights in (("ones", WeightSet.ones(g)), ("trained", trained)):
            result = bp.decode_batch(g, weights, words.llr, 5)
            failures[name] = int(np.count_nonzero(np.any(result.hard, axis=1)))
        ones_lo, _ = wilson_interval(failures["ones"], 10_000)
        _, trained_hi = wilson_interval(failures["trained"], 10_000)
        self.assertLess(trained_hi, ones_lo, f"Échecs sur la classe: {failures}")


if __name__ == '__main__':
    unittest.main()
