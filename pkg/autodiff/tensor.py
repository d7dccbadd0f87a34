#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tensor - Motor de diferenciação reversa

Tensores densos sobre numpy com um grafo em fita: cada operação executada
sobre um tensor ligado a um Graph é registrada em ordem; backward() percorre
a fita ao contrário acumulando gradientes por node-id. A fita é descartada a
cada passo de treino (Graph.reset ou um Graph novo).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from utils.errors import GraphError, NonFiniteError, ShapeError

PRECISIONS = {"f64": np.float64, "f32": np.float32}

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
AxisSpec = Union[None, int, Sequence[int]]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def resolve_precision(precision: Optional[str] = None) -> np.dtype:
    """Converte 'f32'/'f64' (ou a variável VLAC_PRECISION) no dtype numpy."""
    name = precision or os.environ.get("VLAC_PRECISION", "f64")
    if name not in PRECISIONS:
        raise ValueError(f"Precisão desconhecida: {name!r} (use f32 ou f64)")
    return np.dtype(PRECISIONS[name])


@dataclass
class _Record:
    op: str
    node_id: int
    parents: Tuple[Optional[int], ...]
    backward: Optional[BackwardFn]


class GradientMap(dict):
    """Gradientes indexados por node-id, com acesso pelo nome do parâmetro."""

    def __init__(self, grads: Dict[int, np.ndarray], names: Dict[int, str]):
        super().__init__(grads)
        self._names = names

    def by_name(self) -> Dict[str, np.ndarray]:
        return {name: self[node_id] for node_id, name in self._names.items()}


class Graph:
    """
    Fita de operações e acumuladores de gradiente.

    Confinado a uma única thread. Depois de backward() a fita fica consumida
    e só volta a aceitar operações após reset().
    """

    def __init__(self, precision: Optional[str] = None, check_finite: bool = True):
        self.dtype = resolve_precision(precision)
        self.check_finite = check_finite
        self._records: List[_Record] = []
        self._parameters: Dict[int, str] = {}
        self._shapes: Dict[int, Tuple[int, ...]] = {}
        self._next_id = 0
        self._consumed = False

    @property
    def operations(self) -> List[str]:
        """Nomes das operações na ordem de gravação."""
        return [record.op for record in self._records]

    def reset(self) -> None:
        self._records.clear()
        self._parameters.clear()
        self._shapes.clear()
        self._next_id = 0
        self._consumed = False

    def _ensure_open(self) -> None:
        if self._consumed:
            raise GraphError("grafo já consumido por backward(); chame reset() antes de reutilizar")

    def _new_node(self, op: str, shape: Tuple[int, ...], parents, backward) -> int:
        node_id = self._next_id
        self._next_id += 1
        self._records.append(_Record(op, node_id, tuple(parents), backward))
        self._shapes[node_id] = shape
        return node_id

    def parameter(self, value: ArrayLike, name: Optional[str] = None) -> "Tensor":
        """Registra uma folha diferenciável."""
        self._ensure_open()
        array = np.array(value, dtype=self.dtype)
        if self.check_finite and not np.isfinite(array).all():
            raise NonFiniteError(name or "parameter")
        node_id = self._new_node("parameter", array.shape, (), None)
        self._parameters[node_id] = name or f"param{node_id}"
        return Tensor(array, self, node_id)

    def constant(self, value: ArrayLike) -> "Tensor":
        return Tensor(np.asarray(value, dtype=self.dtype))

    def record(self, op: str, value: np.ndarray, parents: Sequence["Tensor"], backward: BackwardFn) -> "Tensor":
        """Grava o resultado de uma operação cujo valor já foi calculado."""
        self._ensure_open()
        if self.check_finite and not np.isfinite(value).all():
            raise NonFiniteError(op, f"formas de entrada {[p.shape for p in parents]}")
        parent_ids = tuple(p.node_id if p.graph is self else None for p in parents)
        if all(pid is None for pid in parent_ids):
            return Tensor(value)
        node_id = self._new_node(op, value.shape, parent_ids, backward)
        return Tensor(value, self, node_id)

    def backward(self, loss: "Tensor") -> GradientMap:
        """
        Propaga gradientes a partir de uma perda escalar.

        Returns:
            GradientMap com um gradiente (zero se inalcançável) para cada parâmetro
        """
        self._ensure_open()
        if loss.graph is not self or loss.node_id is None:
            raise GraphError("a perda não pertence a este grafo")
        if loss.shape != ():
            raise GraphError(f"backward exige perda escalar, recebeu forma {loss.shape}")

        grads: Dict[int, np.ndarray] = {loss.node_id: np.ones((), dtype=self.dtype)}
        for record in reversed(self._records):
            grad = grads.get(record.node_id)
            if grad is None or record.backward is None:
                continue
            if record.node_id not in self._parameters:
                del grads[record.node_id]
            for parent_id, parent_grad in zip(record.parents, record.backward(grad)):
                if parent_id is None or parent_grad is None:
                    continue
                if parent_id in grads:
                    grads[parent_id] = grads[parent_id] + parent_grad
                else:
                    grads[parent_id] = parent_grad

        result = {}
        for node_id in self._parameters:
            grad = grads.get(node_id)
            if grad is None:
                grad = np.zeros(self._shapes[node_id], dtype=self.dtype)
            result[node_id] = np.array(grad, dtype=self.dtype).reshape(self._shapes[node_id])
        self._consumed = True
        return GradientMap(result, dict(self._parameters))


class Tensor:
    """Array n-dimensional real, opcionalmente ligado a um nó do grafo."""

    __slots__ = ("value", "graph", "node_id")
    __array_priority__ = 100

    def __init__(self, value: ArrayLike, graph: Optional[Graph] = None, node_id: Optional[int] = None):
        self.value = np.asarray(value)
        if not np.issubdtype(self.value.dtype, np.floating):
            self.value = self.value.astype(np.float64)
        self.graph = graph
        self.node_id = node_id

    def __repr__(self):
        kind = "const" if self.node_id is None else f"node={self.node_id}"
        return f"Tensor(shape={self.shape}, {kind})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def size(self) -> int:
        return self.value.size

    @property
    def dtype(self) -> np.dtype:
        return self.value.dtype

    def numpy(self) -> np.ndarray:
        return self.value

    def item(self) -> float:
        return float(self.value)

    def detach(self) -> "Tensor":
        return Tensor(self.value)

    # operadores
    def __add__(self, other): return elementwise("add", self, other)
    def __radd__(self, other): return elementwise("add", other, self)
    def __sub__(self, other): return elementwise("sub", self, other)
    def __rsub__(self, other): return elementwise("sub", other, self)
    def __mul__(self, other): return elementwise("mul", self, other)
    def __rmul__(self, other): return elementwise("mul", other, self)
    def __truediv__(self, other): return elementwise("div", self, other)
    def __rtruediv__(self, other): return elementwise("div", other, self)
    def __neg__(self): return elementwise("negate", self)
    def __matmul__(self, other): return matmul(self, other)
    def __rmatmul__(self, other): return matmul(other, self)

    def exp(self): return elementwise("exp", self)
    def log(self): return elementwise("log", self)
    def tanh(self): return elementwise("tanh", self)
    def sigmoid(self): return elementwise("sigmoid", self)
    def softplus(self): return elementwise("softplus", self)
    def relu(self): return elementwise("relu", self)
    def square(self): return elementwise("square", self)

    def sum(self, axis: AxisSpec = None, keepdims: bool = False): return reduce("sum", self, axis, keepdims)
    def mean(self, axis: AxisSpec = None, keepdims: bool = False): return reduce("mean", self, axis, keepdims)
    def max(self, axis: AxisSpec = None, keepdims: bool = False): return reduce("max", self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def _graph_of(tensors: Sequence[Tensor]) -> Optional[Graph]:
    graph = None
    for tensor in tensors:
        if tensor.graph is None:
            continue
        if graph is None:
            graph = tensor.graph
        elif tensor.graph is not graph:
            raise GraphError("operação mistura tensores de grafos diferentes")
    return graph


def _as_tensor(value: ArrayLike, dtype: Optional[np.dtype] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype) if dtype is not None else np.asarray(value, dtype=np.float64))


def _lift(*values: ArrayLike) -> Tuple[Optional[Graph], List[Tensor]]:
    graph = _graph_of([v for v in values if isinstance(v, Tensor)])
    dtype = graph.dtype if graph is not None else None
    return graph, [_as_tensor(v, dtype) for v in values]


def _emit(graph: Optional[Graph], op: str, value: np.ndarray, parents: Sequence[Tensor], backward: BackwardFn) -> Tensor:
    if graph is None:
        return Tensor(value)
    return graph.record(op, value, parents, backward)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Soma o gradiente sobre os eixos que foram expandidos por broadcast."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# (forward, backward(x, y, grad)) para operações unárias
_UNARY: Dict[str, Tuple[Callable, Callable]] = {
    "exp": (np.exp, lambda x, y, g: g * y),
    "log": (np.log, lambda x, y, g: g / x),
    "tanh": (np.tanh, lambda x, y, g: g * (1.0 - y * y)),
    "sigmoid": (expit, lambda x, y, g: g * y * (1.0 - y)),
    "softplus": (lambda x: np.logaddexp(0.0, x), lambda x, y, g: g * expit(x)),
    # subgradiente 0 em x == 0
    "relu": (lambda x: np.maximum(x, 0.0), lambda x, y, g: g * (x > 0)),
    "square": (np.square, lambda x, y, g: 2.0 * g * x),
    "negate": (np.negative, lambda x, y, g: -g),
}

# (forward, backward(a, b, grad) -> (da, db)) para operações binárias
_BINARY: Dict[str, Tuple[Callable, Callable]] = {
    "add": (np.add, lambda a, b, g: (g, g)),
    "sub": (np.subtract, lambda a, b, g: (g, -g)),
    "mul": (np.multiply, lambda a, b, g: (g * b, g * a)),
    "div": (np.divide, lambda a, b, g: (g / b, -g * a / (b * b))),
}

ELEMENTWISE_OPS = tuple(_UNARY) + tuple(_BINARY)


def elementwise(kind: str, a: ArrayLike, b: Optional[ArrayLike] = None) -> Tensor:
    """
    Aplica uma operação elemento a elemento com broadcast pelos eixos finais.

    Args:
        kind: Um dos nomes em ELEMENTWISE_OPS
        a: Primeiro operando
        b: Segundo operando (somente operações binárias)
    """
    if kind in _UNARY:
        if b is not None:
            raise ValueError(f"'{kind}' é unária e não aceita segundo operando")
        graph, (x,) = _lift(a)
        forward, derivative = _UNARY[kind]
        with np.errstate(all="ignore"):
            y = np.asarray(forward(x.value))
        xv = x.value
        return _emit(graph, kind, y, (x,), lambda g: (derivative(xv, y, g),))

    if kind in _BINARY:
        if b is None:
            raise ValueError(f"'{kind}' é binária e exige segundo operando")
        graph, (x, z) = _lift(a, b)
        try:
            np.broadcast_shapes(x.shape, z.shape)
        except ValueError:
            raise ShapeError(f"{kind}: formas incompatíveis {x.shape} e {z.shape}") from None
        forward, derivative = _BINARY[kind]
        with np.errstate(all="ignore"):
            y = np.asarray(forward(x.value, z.value))
        av, bv = x.value, z.value

        def backward(g):
            with np.errstate(all="ignore"):
                da, db = derivative(av, bv, g)
            return unbroadcast(np.asarray(da), av.shape), unbroadcast(np.asarray(db), bv.shape)

        return _emit(graph, kind, y, (x, z), backward)

    raise ValueError(f"Operação elemento a elemento desconhecida: {kind!r}")


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Produto matricial m×k · k×n."""
    graph, (x, w) = _lift(a, b)
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"matmul: formas incompatíveis {x.shape} e {w.shape}")
    xv, wv = x.value, w.value
    return _emit(graph, "matmul", xv @ wv, (x, w), lambda g: (g @ wv.T, xv.T @ g))


def _normalize_axes(axis: AxisSpec, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, (int, np.integer)) else tuple(axis)
    normalized = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise ShapeError(f"eixo {ax} inválido para tensor com {ndim} dimensões")
        normalized.append(int(ax) % ndim)
    if len(set(normalized)) != len(normalized):
        raise ShapeError(f"eixos repetidos em {axis}")
    return tuple(sorted(normalized))


def reduce(kind: str, a: ArrayLike, axis: AxisSpec = None, keepdims: bool = False) -> Tensor:
    """Redução sum/mean/max; max encaminha o gradiente ao primeiro argmax."""
    graph, (x,) = _lift(a)
    axes = _normalize_axes(axis, x.ndim)
    shape = x.shape
    count = int(np.prod([shape[ax] for ax in axes])) if axes else 1

    def expand(g):
        if not keepdims and axes:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g, shape)

    if kind == "sum":
        value = x.value.sum(axis=axes, keepdims=keepdims)
        return _emit(graph, "sum", np.asarray(value), (x,), lambda g: (expand(g),))

    if kind == "mean":
        if count == 0:
            raise ShapeError(f"mean sobre eixo vazio (forma {shape})")
        value = x.value.mean(axis=axes, keepdims=keepdims)
        return _emit(graph, "mean", np.asarray(value), (x,), lambda g: (expand(g) / count,))

    if kind == "max":
        if count == 0:
            raise ShapeError(f"max sobre eixo vazio (forma {shape})")
        kept = x.ndim - len(axes)
        moved = np.moveaxis(x.value, axes, tuple(range(kept, x.ndim)))
        flat = moved.reshape(moved.shape[:kept] + (-1,))
        index = flat.argmax(axis=-1)
        value = np.take_along_axis(flat, index[..., None], axis=-1)[..., 0]
        if keepdims:
            value = np.expand_dims(value, axes)

        def backward(g):
            if keepdims:
                g = np.squeeze(g, axis=axes)
            grad_flat = np.zeros_like(flat)
            np.put_along_axis(grad_flat, index[..., None], np.asarray(g)[..., None], axis=-1)
            return (np.moveaxis(grad_flat.reshape(moved.shape), tuple(range(kept, x.ndim)), axes),)

        return _emit(graph, "max", np.asarray(value), (x,), backward)

    raise ValueError(f"Redução desconhecida: {kind!r}")


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    """Concatena ao longo de um eixo; os demais eixos precisam coincidir."""
    if not tensors:
        raise ShapeError("concat exige ao menos um tensor")
    graph, parts = _lift(*tensors)
    ndim = parts[0].ndim
    if any(p.ndim != ndim for p in parts):
        raise ShapeError(f"concat: número de dimensões diferente {[p.shape for p in parts]}")
    (ax,) = _normalize_axes(axis, ndim)
    for p in parts[1:]:
        if p.shape[:ax] + p.shape[ax + 1:] != parts[0].shape[:ax] + parts[0].shape[ax + 1:]:
            raise ShapeError(f"concat: formas incompatíveis {[q.shape for q in parts]} no eixo {axis}")
    offsets = np.cumsum([p.shape[ax] for p in parts])[:-1]
    value = np.concatenate([p.value for p in parts], axis=ax)
    return _emit(graph, "concat", value, parts, lambda g: tuple(np.split(g, offsets, axis=ax)))


def reshape(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    graph, (x,) = _lift(a)
    try:
        value = x.value.reshape(tuple(shape))
    except ValueError:
        raise ShapeError(f"reshape: {x.shape} não pode virar {tuple(shape)}") from None
    original = x.shape
    return _emit(graph, "reshape", value, (x,), lambda g: (g.reshape(original),))


def stop_gradient(a: ArrayLike) -> Tensor:
    """Cópia constante: o gradiente não atravessa."""
    return Tensor(a.value if isinstance(a, Tensor) else np.asarray(a, dtype=np.float64))


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shift = stop_gradient(np.max(a.value, axis=axis, keepdims=True))
    shifted = a - shift
    return shifted - shifted.exp().sum(axis=axis, keepdims=True).log()


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    return log_softmax(a, axis).exp()


def one_hot(indices: np.ndarray, depth: int, dtype=np.float64) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros(indices.shape + (depth,), dtype=dtype)
    np.put_along_axis(out, indices[..., None], 1.0, axis=-1)
    return out


LOG_2PI = math.log(2.0 * math.pi)
