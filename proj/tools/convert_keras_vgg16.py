# Copyright 2026 The Vartha Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Converts Keras VGG-16 ImageNet weights to the VGG16W01 format.

  python tools/convert_keras_vgg16.py vgg16_imagenet.bin
  python tools/convert_keras_vgg16.py out.bin --h5 vgg16_weights_tf_dim_ordering_tf_kernels_notop.h5

Layout: magic "VGG16W01", u32 name length, name, u32 layer count (13), then
per conv layer u32 in, u32 out, kernel as f32 (ky, kx, in, out), bias as f32.
All integers and floats little-endian.
"""

import argparse
import struct
import sys

import numpy as np

MAGIC = b"VGG16W01"
SHAPES = [(3, 64), (64, 64), (64, 128), (128, 128), (128, 256), (256, 256), (256, 256),
          (256, 512), (512, 512), (512, 512), (512, 512), (512, 512), (512, 512)]


def conv_layers(h5_path):
  from tensorflow import keras  # pylint: disable=import-outside-toplevel
  weights = h5_path if h5_path else "imagenet"
  model = keras.applications.VGG16(weights=weights, include_top=False, input_shape=(224, 224, 3))
  return [layer.get_weights() for layer in model.layers if isinstance(layer, keras.layers.Conv2D)]


def write(path, name, layers):
  if len(layers) != len(SHAPES):
    raise ValueError(f"expected 13 conv layers, got {len(layers)}")
  with open(path, "wb") as f:
    f.write(MAGIC)
    encoded = name.encode("utf-8")
    f.write(struct.pack("<I", len(encoded)))
    f.write(encoded)
    f.write(struct.pack("<I", len(layers)))
    for (kernel, bias), (cin, cout) in zip(layers, SHAPES):
      if kernel.shape != (3, 3, cin, cout) or bias.shape != (cout,):
        raise ValueError(f"unexpected conv shape {kernel.shape}")
      f.write(struct.pack("<II", cin, cout))
      f.write(np.ascontiguousarray(kernel, dtype="<f4").tobytes())
      f.write(np.ascontiguousarray(bias, dtype="<f4").tobytes())


def main(argv=None):
  parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  parser.add_argument("output")
  parser.add_argument("--h5", help="local notop weights file (default: download imagenet)")
  parser.add_argument("--name", default="keras-vgg16-imagenet")
  args = parser.parse_args(argv)
  write(args.output, args.name, conv_layers(args.h5))
  return 0


if __name__ == "__main__":
  sys.exit(main())
