"""
Training a small QCNN on digits 1 and 8
=======================================

One convolution layer (nine mask weights), a pooling layer and a single
Z-Hamiltonian readout on eight qubits, 46 parameters in all. The script
trains a short noise-free run and then evaluates the result with Pauli
noise switched on.

Run with ``python demos/train_binary.py [epochs]``. MNIST files are looked
up in ``$QCNN_DATA_DIR`` or ``data/mnist``.
"""

import sys

from qcnn import NoiseChannel, TrainConfig, evaluate, load_split, train

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 10
train_data = load_split("train", filter_labels=(1, 8))
test_data = load_split("test", filter_labels=(1, 8))

config = TrainConfig(task="binary", epochs=epochs, train_size=300, test_size=len(test_data), seed=0)
print(f"{len(train_data)} training and {len(test_data)} test images available")


def show(row):
    print(f"epoch {row['epoch']:3d}  loss {row['loss']:.4f}  "
          f"train {row['train_acc']:.3f}  test {row['test_acc']:.3f}")


params, metrics = train(config, train_data, test_data, callback=show)

# The trained mask is usually far from any of the image-processing presets.
print("learned mask:")
print(params.mask.round(3))

# Evaluate the same parameters on the whole test split with a Pauli channel
# that fires after every circuit step with probability p.
for p in (0.0, 0.01, 0.05):
    noise = NoiseChannel(p, seed=1) if p else None
    print(f"p = {p:<5} accuracy {evaluate(params, test_data, noise):.3f}")
