import os
import shutil
import tempfile
import unittest

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from ca.uqam.info.bprnn import channel


class classe_tests_channel (unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(2024)
        self.params = channel.snr_to_sigma(4.0)
        self.work_directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.work_directory)

    def test_conversion_snr(self):
        params = channel.snr_to_sigma(0.0)
        self.assertAlmostEqual(params.sigma2, 1.0, msg="0 dB doit donner sigma^2 = 1")
        self.assertAlmostEqual(self.params.sigma2, 10 ** -0.4)
        with self.assertRaises(ValueError):
            channel.snr_to_sigma(float("nan"))

    def test_probabilite_erreur_4db(self):
        p = self.params.error_probability()
        self.assertAlmostEqual(p, 0.0565, delta=5e-4, msg="Q(1/sigma) à 4 dB")
        self.assertAlmostEqual(128 * p, 7.2, delta=0.05, msg="N p_e pour N = 128")

    def test_calibration_empirique(self):
        words = channel.sample_awgn(self.params, 1000, self.rng, size=1000)
        empirical = np.mean(words.y <= 0)
        self.assertAlmostEqual(empirical, 0.0565, delta=1e-3, msg="Fréquence empirique des erreurs à 4 dB")

    def test_llr_canal(self):
        y = np.array([1.0, -0.5, 0.0])
        np.testing.assert_allclose(channel.channel_llr(y, self.params), 2 * y / self.params.sigma2)

    def test_classe_erreur_exacte(self):
        A = {3, 10, 42}
        for _ in range(200):
            word = channel.sample_error_class(self.params, A, 64, self.rng)
            self.assertEqual(channel.error_set(word), A, "L'ensemble d'erreurs doit être exactement A")

    def test_motifs_par_lot(self):
        mask = self.rng.random((500, 32)) < 0.2
        words = channel.sample_error_patterns(self.params, mask, self.rng)
        np.testing.assert_array_equal(words.y <= 0, mask)

    def test_classe_erreur_snr_extreme(self):
        # Phi(-1/sigma) underflows in double precision at 40 dB
        params = channel.snr_to_sigma(40.0)
        mask = np.zeros((100, 16), dtype=bool)
        mask[:, [1, 5]] = True
        words = channel.sample_error_patterns(params, mask, self.rng)
        self.assertTrue(np.all(np.isfinite(words.y)), "Le bruit tronqué doit rester fini")
        np.testing.assert_array_equal(words.y <= 0, mask)
        self.assertTrue(np.all(words.y[mask] > -0.01), "Les erreurs restent collées à la borne")

    def test_moyenne_tronquee(self):
        # conditional mean of z given z < -1, by numerical integration
        params = channel.snr_to_sigma(0.0)
        sigma = params.sigma
        mass = norm.cdf(-1.0, scale=sigma)
        expected = quad(lambda z: z * norm.pdf(z, scale=sigma), -np.inf, -1.0)[0] / mass
        mask = np.ones((200, 500), dtype=bool)
        z = channel.sample_error_patterns(params, mask, self.rng).y - 1.0
        self.assertAlmostEqual(float(np.mean(z)), expected, delta=0.01, msg="Moyenne de la gaussienne tronquée")

    def test_flux_reproductibles(self):
        a = channel.worker_stream(5, 1, 2).random(4)
        b = channel.worker_stream(5, 1, 2).random(4)
        c = channel.worker_stream(5, 2, 1).random(4)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c), "Des clés différentes doivent donner des flux différents")

    def test_sauvegarde_ensemble_entrainement(self):
        words = channel.sample_awgn(self.params, 16, self.rng, size=5)
        path = os.path.join(self.work_directory, "train.f32")
        channel.dump_training_set(path, words, self.params, "3-(3,3,(3,3))")
        self.assertTrue(os.path.exists(path + ".json"), "Fichier compagnon JSON manquant")
        np.testing.assert_array_equal(channel.load_training_set(path), words.y.astype(np.float32))


if __name__ == '__main__':
    unittest.main()
