import json
import os
import shutil
import tempfile
import unittest

from ca.uqam.info.bprnn.config_loader import (ExperimentConfig, PoolEntry, config_loader, load_experiment,
                                              load_pool_manifest, write_pool_manifest)
from ca.uqam.info.bprnn.errors import ConfigError


class classe_tests_config (unittest.TestCase):

    def setUp(self):
        self.data_directory = "./data"
        self.work_directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.work_directory)

    def _write_json(self, name, content):
        path = os.path.join(self.work_directory, name)
        with open(path, "w") as json_file:
            json.dump(content, json_file)
        return path

    def test_lecture_experience(self):
        cfg = load_experiment(self.data_directory + "/experiment_hamming.json")
        self.assertEqual(cfg.decoder, "diversity-parallel")
        self.assertEqual(cfg.snr_db, [2.0, 3.0, 4.0])
        self.assertEqual((cfg.z, cfg.i_test, cfg.seed), (2, 10, 7))
        self.assertEqual(os.path.normpath(cfg.alist), os.path.normpath("./data/hamming_7_4.alist"),
                         "Les chemins sont relatifs au fichier de configuration")

    def test_surcharges(self):
        cfg = load_experiment(self.data_directory + "/experiment_hamming.json",
                              {"seed": 99, "z": None, "alist": "/tmp/other.alist"})
        self.assertEqual(cfg.seed, 99)
        self.assertEqual(cfg.z, 2, "Une surcharge à None ne remplace rien")
        self.assertEqual(cfg.alist, "/tmp/other.alist")

    def test_valeurs_par_defaut(self):
        cfg = config_loader().build_experiment({})
        self.assertEqual((cfg.decoder, cfg.i_test, cfg.min_errors, cfg.max_frames), ("bp", 25, 100, 10_000_000))
        self.assertEqual((cfg.z, cfg.anchor_snr_db, cfg.osd_mode), (10, 5.0, "off"))

    def test_cle_inconnue(self):
        path = self._write_json("bad.json", {"decoder": "bp", "snr": [1.0]})
        with self.assertRaises(ConfigError):
            load_experiment(path)

    def test_json_invalide(self):
        path = os.path.join(self.work_directory, "broken.json")
        with open(path, "w") as json_file:
            json_file.write("{\"decoder\": ")
        with self.assertRaises(ConfigError):
            load_experiment(path)

    def test_valeurs_invalides(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig(decoder="turbo")
        with self.assertRaises(ConfigError):
            ExperimentConfig(snr_db=[])
        with self.assertRaises(ConfigError):
            ExperimentConfig(min_errors=0)
        with self.assertRaises(ConfigError):
            ExperimentConfig(osd_order=3)
        with self.assertRaises(ConfigError):
            ExperimentConfig(decoder="diversity-serial", osd_mode="periodic")
        self.assertEqual(ExperimentConfig(snr_db=3).snr_db, [3.0])

    def test_mode_osd_periodique_abrege(self):
        cfg = ExperimentConfig(osd_mode="periodic-25", periodic_every=3)
        self.assertEqual((cfg.osd_mode, cfg.periodic_every), ("periodic", 25))
        path = self._write_json("periodic.json", {"decoder": "bprnn-single", "osd_mode": "periodic-10"})
        cfg = load_experiment(path)
        self.assertEqual((cfg.osd_mode, cfg.periodic_every), ("periodic", 10))
        for bad in ("periodic-", "periodic-x", "periodic-0"):
            with self.assertRaises(ConfigError, msg=bad):
                ExperimentConfig(osd_mode=bad)

    def test_configuration_entrainement(self):
        cfg = ExperimentConfig(train={"i_train": 5, "batch_size": 64})
        train = cfg.train_config(4.0, "3-(3,3,(3,3))")
        self.assertEqual((train.snr_db, train.i_train, train.batch_size), (4.0, 5, 64))
        self.assertEqual(train.class_label, "3-(3,3,(3,3))")
        with self.assertRaises(ConfigError):
            ExperimentConfig(train={"iterations": 5}).train_config(4.0, "x")

    def test_manifeste(self):
        entries = load_pool_manifest(self.data_directory + "/hamming_pool.json")
        self.assertEqual([e.id for e in entries], [0, 1])
        self.assertEqual(entries[1].class_label, "damped")
        self.assertEqual(entries[0].snr_db, 3.0)
        self.assertTrue(os.path.exists(entries[0].weights), "Chemin des poids relatif au manifeste")

    def test_manifeste_ids_en_double(self):
        path = self._write_json("pool.json", [{"id": 0, "class": "a", "weights": "w.txt"},
                                              {"id": 0, "class": "b", "weights": "w.txt"}])
        with self.assertRaises(ConfigError):
            load_pool_manifest(path)
        path = self._write_json("pool2.json", [{"id": 0, "weights": "w.txt"}])
        with self.assertRaises(ConfigError):
            load_pool_manifest(path)

    def test_ecriture_manifeste(self):
        weights = os.path.join(self.work_directory, "weights", "w_0.txt")
        path = os.path.join(self.work_directory, "pool.json")
        write_pool_manifest(path, [PoolEntry(0, "3-(3,3,(3,3))", weights, 4.0)])
        with open(path, "r") as manifest:
            self.assertEqual(json.load(manifest)[0]["weights"], os.path.join("weights", "w_0.txt"))
        back = load_pool_manifest(path)
        self.assertEqual(os.path.abspath(back[0].weights), os.path.abspath(weights))
        self.assertEqual((back[0].class_label, back[0].snr_db), ("3-(3,3,(3,3))", 4.0))


if __name__ == '__main__':
    unittest.main()
