"""Simulated quantum convolutional networks built on an LCU image filter."""

from qcnn.errors import (ConfigError, DataError, DimensionError, ImageFormatError, QCNNError,
                         ZeroProbabilityError)
from qcnn.hamiltonian import ZHamiltonian, expectation, gradient, num_parameters
from qcnn.imaging import decode, encode, load_image, load_mnist, save_image
from qcnn.lcu import (HADAMARD, PRESETS, SDAGGER, FilterMask, branch_masks, build_plan, dense_u_prime,
                      filter_image, run_convolution)
from qcnn.noise import NoiseChannel
from qcnn.oracle import cyclic_filter, interior_filter
from qcnn.pooling import PoolSpec, pool
from qcnn.shifts import compile_shift, count_basic_gates
from qcnn.state import Gate, QuantumState, apply_circuit, apply_gate, postselect
from qcnn.training import ModelParams, TrainConfig, evaluate, forward, load_split, train

__version__ = "0.1.0"
