from __future__ import annotations
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from noisylab.errors.tensor_error import TensorError

Shape = Tuple[int, ...]


@dataclass(frozen=True)
class LayerShape:
    kind: str  # "conv" or "affine"
    weight: Shape
    bias: Shape

    @property
    def fan_in(self) -> int:
        if self.kind == "conv":
            _, channels, kh, kw = self.weight
            return channels * kh * kw
        return self.weight[0]


@dataclass(frozen=True)
class Architecture:
    """Layer layout shared by both networks of a run.

    An empty ``conv_channels`` is a plain MLP over the flattened input;
    otherwise a stack of valid ``kernel`` x ``kernel`` relu convolutions runs
    first and the MLP head sits on their flattened output. Every hidden layer is
    followed by relu; the last affine layer emits logits.
    """

    input_shape: Shape
    hidden: Tuple[int, ...]
    classes: int
    conv_channels: Tuple[int, ...] = ()
    kernel: int = 3

    def __post_init__(self) -> None:
        if not self.input_shape or any(d <= 0 for d in self.input_shape):
            raise TensorError("architecture", f"invalid input shape {self.input_shape}")
        if any(d <= 0 for d in self.hidden) or self.classes <= 0:
            raise TensorError("architecture", "layer widths must be positive")
        if self.conv_channels:
            if len(self.input_shape) != 3:
                raise TensorError("architecture", "conv layers need a CxHxW input")
            if self.kernel <= 0 or any(c <= 0 for c in self.conv_channels):
                raise TensorError("architecture", "conv channels and kernel must be positive")
            shrink = len(self.conv_channels) * (self.kernel - 1)
            if self.input_shape[1] - shrink < 1 or self.input_shape[2] - shrink < 1:
                raise TensorError("architecture", f"{len(self.conv_channels)} conv layers of kernel "
                                                  f"{self.kernel} do not fit a {self.input_shape} input")

    @staticmethod
    def mlp(sizes: Sequence[int]) -> "Architecture":
        """``[in, h1, ..., out]`` -> MLP over a flat input of width ``in``."""
        if len(sizes) < 2:
            raise TensorError("architecture", "an MLP needs at least input and output sizes")
        return Architecture(input_shape=(int(sizes[0]),), hidden=tuple(int(s) for s in sizes[1:-1]),
                            classes=int(sizes[-1]))

    @property
    def kind(self) -> str:
        return "conv" if self.conv_channels else "mlp"

    @property
    def input_size(self) -> int:
        size = 1
        for extent in self.input_shape:
            size *= extent
        return size

    def layer_shapes(self) -> List[LayerShape]:
        shapes: List[LayerShape] = []
        width = self.input_size
        if self.conv_channels:
            channels, height, cols = self.input_shape
            for out_channels in self.conv_channels:
                shapes.append(LayerShape("conv", (out_channels, channels, self.kernel, self.kernel), (out_channels,)))
                channels = out_channels
                height -= self.kernel - 1
                cols -= self.kernel - 1
            width = channels * height * cols
        for size in (*self.hidden, self.classes):
            shapes.append(LayerShape("affine", (width, size), (size,)))
            width = size
        return shapes

    # ------------------------------------------------------------ descriptor

    def describe(self) -> str:
        parts = [self.kind, "in=" + "x".join(str(d) for d in self.input_shape)]
        if self.conv_channels:
            parts.append("conv=" + ",".join(str(c) for c in self.conv_channels))
            parts.append(f"kernel={self.kernel}")
        parts.append("hidden=" + ",".join(str(h) for h in self.hidden))
        parts.append(f"classes={self.classes}")
        return " ".join(parts)

    @staticmethod
    def parse(text: str) -> "Architecture":
        tokens = text.split()
        if not tokens or tokens[0] not in ("mlp", "conv"):
            raise TensorError("architecture", f"unrecognised descriptor '{text}'")
        fields = dict(token.split("=", 1) for token in tokens[1:] if "=" in token)
        try:
            def ints(key: str, sep: str) -> Tuple[int, ...]:
                raw = fields.get(key, "")
                return tuple(int(v) for v in raw.split(sep) if v)

            return Architecture(
                input_shape=ints("in", "x"),
                hidden=ints("hidden", ","),
                classes=int(fields["classes"]),
                conv_channels=ints("conv", ",") if tokens[0] == "conv" else (),
                kernel=int(fields.get("kernel", 3)),
            )
        except (KeyError, ValueError) as exc:
            raise TensorError("architecture", f"unrecognised descriptor '{text}'") from exc
