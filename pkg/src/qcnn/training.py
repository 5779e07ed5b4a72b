"""End-to-end QCNN: convolution -> pooling -> Z-Hamiltonian readout -> activation.

Hamiltonian coefficients get analytic gradients (the expectation is linear
in them); the nine mask weights get central finite differences through the
simulated circuit. Optimisation is plain gradient descent.

Randomness is keyed by integer labels derived from the run seed:
``(seed, 0)`` picks the data subsets, ``(seed, 1, epoch)`` the epoch sample,
``(seed, 2)`` initial parameters, and noise trajectories use
``(seed, 3, epoch, sample)`` for training and ``(seed, 4, split, sample)``
for evaluation.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from qcnn.errors import ConfigError, DataError, ZeroProbabilityError
from qcnn.hamiltonian import ZHamiltonian, activate, features, num_parameters, predict
from qcnn.imaging import encode, load_mnist
from qcnn.lcu import SDAGGER, UNCOMPUTE, build_plan, run_convolution
from qcnn.noise import NoiseChannel, inject_into
from qcnn.pooling import pooled_probabilities

log = logging.getLogger(__name__)

BINARY = "binary"
TENCLASS = "tenclass"
BINARY_LABELS = (1, 8)
IMAGE_QUBITS = 10
POOLED_QUBITS = 8
FC_OP_OFFSET = 11  # noise op index of the first readout; 0..10 are convolution steps
MAX_SHOTS = 32  # redraws of a noisy trajectory whose postselection fails


@dataclass
class TrainConfig:
    task: str = BINARY
    epochs: int = 50
    images_per_epoch: int = 100
    learning_rate: float = 0.01
    minibatch: int = 1
    noise_p: float = 0.0
    repeats: int = 1
    seed: int = 0
    uncompute: str = SDAGGER
    train_size: int = 500
    test_size: int = 200
    fd_step: float = 1e-4
    eval_train: bool = True

    def validate(self) -> "TrainConfig":
        problems = []
        if self.task not in (BINARY, TENCLASS):
            problems.append(f"task: expected '{BINARY}' or '{TENCLASS}', got {self.task!r}")
        for name in ("epochs", "images_per_epoch", "repeats", "minibatch", "train_size", "test_size"):
            if int(getattr(self, name)) < 1:
                problems.append(f"{name}: must be >= 1, got {getattr(self, name)}")
        if self.learning_rate < 0:
            problems.append(f"learning_rate: must be >= 0, got {self.learning_rate}")
        if not 0 <= self.noise_p <= 1:
            problems.append(f"noise_p: must lie in [0, 1], got {self.noise_p}")
        if self.uncompute != SDAGGER:
            problems.append(f"uncompute: training postselects a single branch, only {SDAGGER!r} is supported")
        if self.uncompute not in UNCOMPUTE:
            problems.append(f"uncompute: expected one of {UNCOMPUTE}")
        if self.fd_step <= 0:
            problems.append(f"fd_step: must be > 0, got {self.fd_step}")
        if problems:
            raise ConfigError(problems)
        return self

    @property
    def num_hamiltonians(self) -> int:
        return 1 if self.task == BINARY else 10

    def noise_channel(self) -> NoiseChannel | None:
        if self.noise_p == 0:
            return None
        return NoiseChannel(self.noise_p, self.seed)


@dataclass
class ModelParams:
    mask: np.ndarray
    hamiltonians: list

    @property
    def task(self) -> str:
        return BINARY if len(self.hamiltonians) == 1 else TENCLASS

    @property
    def num_parameters(self) -> int:
        return 9 + sum(h.num_parameters for h in self.hamiltonians)

    def copy(self) -> "ModelParams":
        return ModelParams(np.array(self.mask, dtype=float), list(self.hamiltonians))

    @classmethod
    def initial(cls, task: str, rng) -> "ModelParams":
        mask = rng.uniform(-0.5, 0.5, (3, 3))
        mask /= np.linalg.norm(mask)
        count = 1 if task == BINARY else 10
        hams = [ZHamiltonian.random(POOLED_QUBITS, rng) for _ in range(count)]
        return cls(mask, hams)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "mask": np.asarray(self.mask).tolist(),
            "num_qubits": POOLED_QUBITS,
            "hamiltonians": [h.to_vector().tolist() for h in self.hamiltonians],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        q = int(d.get("num_qubits", POOLED_QUBITS))
        return cls(np.array(d["mask"], dtype=float),
                   [ZHamiltonian.from_vector(q, v) for v in d["hamiltonians"]])


@dataclass
class FcOutput:
    raw: float | np.ndarray
    activated: float | np.ndarray
    features: list = field(default_factory=list, repr=False)

    @property
    def prediction(self) -> int:
        return predict(self.activated, "sigmoid" if np.ndim(self.raw) == 0 else "softmax")


def encode_dataset(data) -> list:
    """Pre-encode (image, label) pairs once; returns (state, label) pairs."""
    return [(encode(img)[0], int(lab)) for img, lab in data]


def _measure(probs_pooled, hams, noise):
    feats = []
    for h_index, H in enumerate(hams):
        p = probs_pooled
        if noise is not None:
            amps = inject_into(np.sqrt(p).astype(complex), POOLED_QUBITS, noise,
                               FC_OP_OFFSET + h_index)
            p = np.abs(amps) ** 2
        feats.append(features(p, POOLED_QUBITS))
    return feats


def forward_state(state, params: ModelParams, noise: NoiseChannel | None = None,
                  plan=None) -> FcOutput:
    """Forward pass on an already encoded 10-qubit image state.

    A noisy trajectory can move all amplitude off the accepted ancilla value.
    That shot is rejected and the trajectory redrawn from ``noise.derive(shot)``
    (deterministically, so finite-difference passes follow the same redraws).
    """
    plan = plan or build_plan(params.mask)
    channel = noise
    for shot in range(MAX_SHOTS):
        try:
            conv = run_convolution(state, plan, channel)
            break
        except ZeroProbabilityError:
            if noise is None:
                raise
            channel = noise.derive(shot + 1)
    else:
        raise ZeroProbabilityError(f"postselection failed on {MAX_SHOTS} noisy trajectories")
    probs = np.abs(conv.state.amplitudes) ** 2
    pooled = pooled_probabilities(probs, state.num_qubits)
    feats = _measure(pooled, params.hamiltonians, channel)
    raws = np.array([f @ H.to_vector() for f, H in zip(feats, params.hamiltonians)])
    if len(raws) == 1:
        return FcOutput(float(raws[0]), activate(raws[0], "sigmoid"), feats)
    return FcOutput(raws, activate(raws, "softmax"), feats)


def forward(image, params: ModelParams, noise: NoiseChannel | None = None) -> FcOutput:
    state, _ = encode(image)
    return forward_state(state, params, noise)


def target_of(label: int, task: str) -> int:
    if task == BINARY:
        if label not in BINARY_LABELS:
            raise DataError(f"label {label} is not part of the binary task {BINARY_LABELS}")
        return BINARY_LABELS.index(label)
    return int(label)


def loss(output: FcOutput, label: int, task: str = BINARY) -> float:
    """Cross-entropy; binary targets are 0 for digit '1' and 1 for digit '8'."""
    y = target_of(label, task)
    eps = 1e-15
    if task == BINARY:
        p = min(max(float(output.activated), eps), 1 - eps)
        return float(-(y * np.log(p) + (1 - y) * np.log(1 - p)))
    return float(-np.log(max(float(output.activated[y]), eps)))


def _raw_gradient(output: FcOutput, y: int, task: str) -> np.ndarray:
    if task == BINARY:
        return np.array([float(output.activated) - y])
    g = np.array(output.activated, dtype=float)
    g[y] -= 1.0
    return g


def sample_gradients(state, label, params: ModelParams, task: str, noise=None, fd_step=1e-4):
    """Loss, Hamiltonian gradients (analytic) and mask gradient (central differences)."""
    y = target_of(label, task)
    out = forward_state(state, params, noise)
    value = loss(out, label, task)
    draw = _raw_gradient(out, y, task)
    ham_grads = [d * f for d, f in zip(draw, out.features)]
    mask_grad = mask_fd_gradient(state, label, params, task, noise, fd_step)
    return value, ham_grads, mask_grad


def mask_fd_gradient(state, label, params, task, noise=None, step=1e-4) -> np.ndarray:
    grad = np.zeros((3, 3))
    for u in range(3):
        for v in range(3):
            vals = []
            for sign in (1, -1):
                p = params.copy()
                p.mask[u, v] += sign * step
                vals.append(loss(forward_state(state, p, noise), label, task))
            grad[u, v] = (vals[0] - vals[1]) / (2 * step)
    return grad


def mask_secant_gradient(state, label, params, task, noise=None, step=5e-5) -> np.ndarray:
    """One-sided forward difference; an independent check on the central scheme."""
    base = loss(forward_state(state, params, noise), label, task)
    grad = np.zeros((3, 3))
    for u in range(3):
        for v in range(3):
            p = params.copy()
            p.mask[u, v] += step
            grad[u, v] = (loss(forward_state(state, p, noise), label, task) - base) / step
    return grad


def evaluate(params: ModelParams, data, noise: NoiseChannel | None = None, split: int = 0,
             encoded: bool = False, with_loss: bool = False):
    """Fraction of correct predictions; ``data`` holds (image or state, label) pairs."""
    if not data:
        raise DataError("cannot evaluate on an empty dataset")
    plan = build_plan(params.mask)
    task = params.task
    correct, total_loss = 0, 0.0
    for i, (x, label) in enumerate(data):
        state = x if encoded else encode(x)[0]
        ch = None if noise is None else noise.derive(4, split, i)
        out = forward_state(state, params, ch, plan)
        correct += int(out.prediction == target_of(label, task))
        if with_loss:
            total_loss += loss(out, label, task)
    acc = correct / len(data)
    return (acc, total_loss / len(data)) if with_loss else acc


@dataclass
class RunMetrics:
    history: list = field(default_factory=list)
    seed: int = 0

    @property
    def final(self) -> dict:
        return self.history[-1] if self.history else {}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(row) + "\n" for row in self.history)


def envelope(runs) -> list:
    """Per-epoch mean/min/max of each metric across repeated runs."""
    out = []
    for rows in zip(*[r.history for r in runs]):
        entry = {"epoch": rows[0]["epoch"]}
        for key in ("train_acc", "test_acc", "loss"):
            vals = np.array([row[key] for row in rows if row.get(key) is not None], dtype=float)
            if vals.size:
                entry[f"{key}_mean"] = float(vals.mean())
                entry[f"{key}_min"] = float(vals.min())
                entry[f"{key}_max"] = float(vals.max())
        out.append(entry)
    return out


def select_subset(data, size: int, rng) -> list:
    if size > len(data):
        raise DataError(f"requested {size} samples but only {len(data)} are available")
    idx = rng.permutation(len(data))[:size]
    return [data[i] for i in sorted(idx)]


def filter_task(data, task: str) -> list:
    if task == BINARY:
        return [(x, lab) for x, lab in data if lab in BINARY_LABELS]
    return list(data)


def train(config: TrainConfig, train_data, test_data=None, params: ModelParams | None = None,
          callback=None):
    """Train one model. ``train_data``/``test_data`` are (image, label) lists.

    The configured ``train_size``/``test_size`` subsets are drawn from the
    label-filtered data. Returns ``(params, metrics)``.
    """
    config.validate()
    rng_data = np.random.default_rng([config.seed, 0])
    train_set = select_subset(filter_task(train_data, config.task), config.train_size, rng_data)
    test_set = None
    if test_data is not None:
        test_set = select_subset(filter_task(test_data, config.task), config.test_size, rng_data)
    if config.images_per_epoch > len(train_set):
        raise DataError(f"images_per_epoch={config.images_per_epoch} exceeds the "
                        f"{len(train_set)} training images")
    train_enc = encode_dataset(train_set)
    test_enc = encode_dataset(test_set) if test_set is not None else None

    if params is None:
        params = ModelParams.initial(config.task, np.random.default_rng([config.seed, 2]))
    else:
        params = params.copy()
    noise = config.noise_channel()
    metrics = RunMetrics(seed=config.seed)
    lr = config.learning_rate

    for epoch in range(config.epochs):
        rng_epoch = np.random.default_rng([config.seed, 1, epoch])
        chosen = rng_epoch.choice(len(train_enc), size=config.images_per_epoch, replace=False)
        batch_losses = []
        for start in range(0, len(chosen), config.minibatch):
            # accumulate in sample-index order so results do not depend on draw order
            batch = sorted(chosen[start:start + config.minibatch])
            h_acc = [np.zeros(H.num_parameters) for H in params.hamiltonians]
            m_acc = np.zeros((3, 3))
            for idx in batch:
                state, label = train_enc[idx]
                ch = None if noise is None else noise.derive(3, epoch, int(idx))
                value, hg, mg = sample_gradients(state, label, params, config.task, ch, config.fd_step)
                batch_losses.append(value)
                for acc, g in zip(h_acc, hg):
                    acc += g
                m_acc += mg
            scale = lr / len(batch)
            params.hamiltonians = [
                ZHamiltonian.from_vector(POOLED_QUBITS, H.to_vector() - scale * g)
                for H, g in zip(params.hamiltonians, h_acc)
            ]
            params.mask = params.mask - scale * m_acc
        row = {"epoch": epoch + 1, "batch_loss": float(np.mean(batch_losses))}
        if config.eval_train:
            row["train_acc"], row["loss"] = evaluate(params, train_enc, noise, 0, True, True)
        else:
            row["train_acc"], row["loss"] = None, row["batch_loss"]
        row["test_acc"] = evaluate(params, test_enc, noise, 1, True) if test_enc else None
        metrics.history.append(row)
        log.info("epoch %d: %s", epoch + 1, row)
        if callback is not None:
            callback(row)
    return params, metrics


def train_repeats(config: TrainConfig, train_data, test_data=None):
    """Run ``config.repeats`` independent trainings with seeds derived from ``config.seed``."""
    runs = []
    for r in range(config.repeats):
        seed = int(np.random.SeedSequence([config.seed, 5, r]).generate_state(1)[0])
        cfg = TrainConfig(**{**asdict(config), "seed": seed, "repeats": 1})
        runs.append(train(cfg, train_data, test_data))
    return runs


def save_params(path, params: ModelParams, extra: dict | None = None) -> None:
    payload = params.to_dict()
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2))


def load_params(path) -> tuple[ModelParams, dict]:
    d = json.loads(Path(path).read_text())
    return ModelParams.from_dict(d), d


def parameter_counts() -> dict:
    return {BINARY: 9 + num_parameters(POOLED_QUBITS),
            TENCLASS: 9 + 10 * num_parameters(POOLED_QUBITS)}


DATA_ENV = "QCNN_DATA_DIR"
_SPLITS = {"train": "train", "test": "t10k"}


def default_data_dir() -> Path:
    """``$QCNN_DATA_DIR`` if set, else the ``data/mnist`` folder of a source checkout."""
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data" / "mnist"


def load_split(split: str, data_dir=None, filter_labels=None) -> list:
    if split not in _SPLITS:
        raise DataError(f"unknown split {split!r}")
    root = Path(data_dir) if data_dir is not None else default_data_dir()
    stem = _SPLITS[split]
    images = root / f"{stem}-images-idx3-ubyte.gz"
    labels = root / f"{stem}-labels-idx1-ubyte.gz"
    for p in (images, labels):
        if not p.exists():
            raise DataError(f"missing MNIST file {p}")
    return load_mnist(images, labels, filter_labels)
