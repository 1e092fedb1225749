import numpy as np

from dnsgt.bench import bench, random_batch
from dnsgt.exceptions import InvalidInputException
from tests.base import BaseTestCase


class TestBench(BaseTestCase):
    def test_rows_per_batch_size_and_mode(self):
        """Test that there is one row of positive timings per batch size and mode."""
        model, _, _ = self.make_model()
        report = bench(model, [1, 2], executions=3, warmup=1)
        frame = report.to_dataframe()

        self.assertEqual(list(frame.columns), ["batch_size", "mode", "cold_start", "latency", "throughput"])
        self.assertEqual(
            list(zip(frame["batch_size"], frame["mode"])), [(1, "train"), (1, "infer"), (2, "train"), (2, "infer")]
        )
        self.assertTrue((frame[["cold_start", "latency", "throughput"]] > 0).all().all())

    def test_training_steps_leave_no_trace(self):
        """Test that benchmarking restores the model's parameters and mode."""
        model, _, _ = self.make_model(task="binary")
        before = {name: array.copy() for name, array in model.state_arrays().items()}

        bench(model, [2], executions=2, warmup=0, modes=("train",))

        self.assertFalse(model.training)

        for name, array in model.state_arrays().items():
            with self.subTest(name=name):
                np.testing.assert_array_equal(array, before[name])

    def test_random_batches_suit_each_head(self):
        """Test that random batches carry what each head's loss needs."""
        rng = np.random.default_rng(0)

        for task, class_names in (("mlm", None), ("binary", None), ("hostclass", ["clean", "virut"])):
            with self.subTest(task=task):
                model, _, _ = self.make_model(task=task, class_names=class_names)
                batch = random_batch(model, 3, rng)
                self.assertTrue(np.isfinite(model.forward_task(batch).loss.item()))

    def test_csv(self):
        """Test that the report is written as CSV with a header line."""
        model, _, _ = self.make_model()
        path = self.path("bench.csv")
        bench(model, [1], executions=1, warmup=0, modes=("infer",)).to_csv(path)

        with open(path) as f:
            lines = f.read().splitlines()

        self.assertEqual(lines[0], "batch_size,mode,cold_start,latency,throughput")
        self.assertEqual(len(lines), 2)

    def test_invalid_arguments(self):
        """Test that empty or non-positive batch sizes, bad execution counts and unknown modes are rejected."""
        model, _, _ = self.make_model()

        for arguments in (
            {"batch_sizes": []},
            {"batch_sizes": [0]},
            {"batch_sizes": [1], "executions": 2, "warmup": 2},
            {"batch_sizes": [1], "modes": ("serve",)},
        ):
            with self.subTest(arguments=arguments):
                with self.assertRaises(InvalidInputException):
                    bench(model, **arguments)
