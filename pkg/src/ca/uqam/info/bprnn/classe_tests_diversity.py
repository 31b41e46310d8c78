import itertools
import os
import shutil
import tempfile
import unittest

import numpy as np

from ca.uqam.info.bprnn import channel
from ca.uqam.info.bprnn.decoding import diversity
from ca.uqam.info.bprnn.decoding.bp import WeightSet
from ca.uqam.info.bprnn.decoding.diversity import (BatchDiversityOutcome, DecoderPool, PoolDecoder, decode_parallel,
                                                   decode_parallel_batch, decode_serial, decode_serial_batch,
                                                   failure_sets, ml_select, select_order, take_diversity)
from ca.uqam.info.bprnn.errors import ConfigError, GraphMismatchError
from ca.uqam.info.bprnn.graph.tanner import is_codeword, read_alist


def codebook(g):
    words = np.array(list(itertools.product((0, 1), repeat=g.N)), dtype=np.uint8)
    return words[is_codeword(g, words)]


class classe_tests_diversity (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        self.hamming = read_alist(self.data_directory + "/hamming_7_4.alist")
        self.rng = np.random.default_rng(3)
        E = self.hamming.E
        self.pool = DecoderPool([
            PoolDecoder(0, "bp"),
            PoolDecoder(1, "damped", WeightSet(np.full(E, 0.75), np.full(E, 0.9))),
            PoolDecoder(2, "random", WeightSet(self.rng.uniform(0.5, 1.5, E), self.rng.uniform(0.5, 1.5, E))),
        ], i_test=25)
        self.work_directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.work_directory)

    def _stuck_pool(self, size):
        # w~ = 0 keeps the channel decision, no decoder can converge on a non-codeword
        E = self.hamming.E
        return DecoderPool([PoolDecoder(j, "stuck", WeightSet(np.ones(E), np.zeros(E))) for j in range(size)],
                           i_test=25)

    def test_ordre_de_selection(self):
        a, b, c = 0, 1, 2
        self.assertEqual(select_order([{a, b}, {b, c}, {a}]), [2, 1, 0])
        self.assertEqual(select_order([set(), set(), set()]), [0, 1, 2], "Égalités départagées par l'indice")

    def test_ordre_est_une_permutation(self):
        for _ in range(50):
            failures = [set(self.rng.choice(20, size=self.rng.integers(0, 12), replace=False).tolist())
                        for _ in range(6)]
            order = select_order(failures)
            self.assertEqual(sorted(order), list(range(6)))
            # local optimality of each greedy pick
            common = set(failures[order[0]])
            for z in range(1, 6):
                picked = len(common & failures[order[z]])
                for later in order[z + 1:]:
                    self.assertLessEqual(picked, len(common & failures[later]))
                common &= failures[order[z]]

    def test_prise_de_diversite(self):
        order = [2, 0, 1]
        self.assertEqual(take_diversity(self.pool, order, 3).ids, [2, 0, 1])
        self.assertEqual(take_diversity(self.pool, order, 1).ids, [2])
        with self.assertRaises(ConfigError):
            take_diversity(self.pool, order, 4)

    def test_identifiants_uniques(self):
        with self.assertRaises(ConfigError):
            DecoderPool([PoolDecoder(0, "a"), PoolDecoder(0, "b")])
        with self.assertRaises(GraphMismatchError):
            DecoderPool([PoolDecoder(0, "a", WeightSet(np.ones(3), np.ones(3))),
                         PoolDecoder(1, "b", WeightSet(np.ones(4), np.ones(4)))])

    def test_selection_ml(self):
        y = np.ones(7)
        c = np.array([1, 1, 1, 0, 0, 0, 0], dtype=np.uint8)
        np.testing.assert_array_equal(ml_select([np.zeros(7, dtype=np.uint8), c], y), np.zeros(7))
        np.testing.assert_array_equal(ml_select([c], y), c, "Un seul candidat")
        with self.assertRaises(ValueError):
            ml_select([], y)

    def test_selection_ml_distance_euclidienne(self):
        book = codebook(self.hamming)
        self.assertEqual(len(book), 16)
        for _ in range(200):
            y = 1.0 + self.rng.normal(0.0, 0.8, size=7)
            chosen = ml_select(book, y)
            distances = np.sum((y - (1.0 - 2.0 * book)) ** 2, axis=1)
            np.testing.assert_array_equal(chosen, book[int(np.argmin(distances))])

    def test_mots_sans_bruit(self):
        llr = np.full(7, 20.0)
        for outcome in (decode_parallel(self.hamming, self.pool, llr, np.ones(7)),
                        decode_serial(self.hamming, self.pool, llr, np.ones(7))):
            self.assertTrue(outcome.success)
            np.testing.assert_array_equal(outcome.chosen, np.zeros(7))
        serial = decode_serial(self.hamming, self.pool, llr, np.ones(7))
        np.testing.assert_array_equal(serial.iterations, [1, 0, 0], "Les décodeurs non lancés comptent 0")
        self.assertTrue(np.all(np.isnan(serial.llr_final[1:])))

    def test_echecs_sans_bruit(self):
        words = channel.ReceivedWord(np.ones((10, 7)), np.full((10, 7), 20.0))
        self.assertEqual(failure_sets(self.hamming, self.pool, words), [set(), set(), set()])

    def test_decodeurs_identiques(self):
        E = self.hamming.E
        weights = WeightSet(np.full(E, 0.8), np.ones(E))
        pool = DecoderPool([PoolDecoder(0, "a", weights), PoolDecoder(1, "b", weights)])
        words = channel.sample_awgn(channel.snr_to_sigma(1.0), 7, self.rng, size=300)
        first, second = failure_sets(self.hamming, pool, words)
        self.assertEqual(first, second)

    def test_serie_pire_cas(self):
        pool = self._stuck_pool(3)
        llr = np.full(7, 3.0)
        llr[0] = -3.0
        outcome = decode_serial_batch(self.hamming, pool, channel.ReceivedWord(llr[None, :] / 6.0, llr[None, :]))
        self.assertFalse(outcome.found[0])
        self.assertIsNone(outcome.outcome(0).chosen)
        total = diversity.metrics(outcome)
        self.assertEqual(total.total_iterations, 3 * 25)
        self.assertEqual(total.total_cn_updates, 3 * 25 * self.hamming.E, "Z x E x i_test en pire cas")
        self.assertFalse(np.any(np.isnan(outcome.llr_final[0])), "Toutes les LLR finales sont gardées")
        np.testing.assert_array_equal(outcome.output[0], [1, 0, 0, 0, 0, 0, 0])

    def test_serie_et_parallele_meme_succes(self):
        words = channel.sample_awgn(channel.snr_to_sigma(1.0), 7, self.rng, size=500)
        parallel = decode_parallel_batch(self.hamming, self.pool, words)
        serial = decode_serial_batch(self.hamming, self.pool, words)
        np.testing.assert_array_equal(parallel.found, serial.found)
        self.assertLessEqual(diversity.metrics(serial).total_iterations,
                             diversity.metrics(parallel).total_iterations)
        for k in np.flatnonzero(serial.found):
            self.assertTrue(is_codeword(self.hamming, serial.output[k]))
            first = int(np.argmax(serial.converged[k]))
            self.assertTrue(np.all(serial.iterations[k, first + 1:] == 0))

    def test_parallele_independant_de_l_ordre(self):
        words = channel.sample_awgn(channel.snr_to_sigma(2.0), 7, self.rng, size=300)
        forward = decode_parallel_batch(self.hamming, self.pool, words)
        backward = decode_parallel_batch(self.hamming, take_diversity(self.pool, [2, 1, 0], 3), words)
        np.testing.assert_array_equal(forward.found, backward.found)
        for k in np.flatnonzero(forward.found):
            np.testing.assert_array_equal(forward.output[k], backward.output[k])

    def test_metriques(self):
        iterations = np.array([[5, 3, 25]])
        kwargs = dict(found=np.array([True]), output=np.zeros((1, 7), dtype=np.uint8), iterations=iterations,
                      converged=np.array([[True, True, False]]), llr_final=np.zeros((1, 3, 7)), n_edges=12)
        parallel = diversity.metrics(BatchDiversityOutcome(diversity.PARALLEL, **kwargs))
        serial = diversity.metrics(BatchDiversityOutcome(diversity.SERIAL, **kwargs))
        self.assertEqual((parallel.avg_iterations, parallel.avg_latency), (33, 25))
        self.assertEqual((serial.avg_iterations, serial.avg_latency), (33, 33))
        self.assertEqual(parallel.avg_cn_updates, 33 * 12)
        merged = parallel + parallel
        self.assertEqual((merged.words, merged.avg_latency), (2, 25))
        with self.assertRaises(ValueError):
            diversity.metrics([])

    def test_rapport_de_selection(self):
        path = os.path.join(self.work_directory, "selection.json")
        failures = [{1, 2}, {2}, set()]
        order = select_order(failures)
        diversity.write_selection_report(path, self.pool, order, failures, 3, 5.0)
        self.assertEqual(diversity.read_selection_order(path), [2, 0, 1])


if __name__ == '__main__':
    unittest.main()
