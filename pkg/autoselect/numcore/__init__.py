from autoselect.numcore.autodiff import evaluate, fd_grad, grad, hvp, relative_error, value_and_grad
from autoselect.numcore.rng import RngStream, fnv1a64, id_hash
from autoselect.numcore.tape import Node, Tape
from autoselect.numcore.tensor import Tensor, flatten
