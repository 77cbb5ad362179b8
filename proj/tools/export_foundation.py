#!/usr/bin/env python3
# Copyright (c) 2026, The promptseg Authors
# SPDX-License-Identifier: Apache-2.0
"""Export a segment_anything checkpoint to the three TorchScript modules the
foundation backend loads: image_encoder.pt, prompt_encoder.pt, mask_decoder.pt.

    python3 tools/export_foundation.py --model-type vit_h \
        --checkpoint sam_vit_h_4b8939.pth --out weights/vit_h

Without --checkpoint the model is randomly initialized (interface tests only).
"""

import argparse
import os
from typing import Tuple

import torch
from torch import nn
from segment_anything import sam_model_registry


class PromptEncoder(nn.Module):
    def __init__(self, pe: nn.Module):
        super().__init__()
        self.embed_dim = pe.embed_dim
        self.height = pe.image_embedding_size[0]
        self.width = pe.image_embedding_size[1]
        self.input_h = pe.input_image_size[0]
        self.input_w = pe.input_image_size[1]
        self.register_buffer("gaussian", pe.pe_layer.positional_encoding_gaussian_matrix.clone())
        self.register_buffer("pe", pe.get_dense_pe().detach().clone())
        self.register_buffer("no_mask", pe.no_mask_embed.weight.detach().clone())
        self.register_buffer("not_a_point", pe.not_a_point_embed.weight.detach().clone())
        self.register_buffer("negative", pe.point_embeddings[0].weight.detach().clone())
        self.register_buffer("positive", pe.point_embeddings[1].weight.detach().clone())
        self.mask_downscaling = pe.mask_downscaling

    def _encode(self, coords: torch.Tensor) -> torch.Tensor:
        coords = (2.0 * coords - 1.0) @ self.gaussian
        coords = 2.0 * 3.141592653589793 * coords
        return torch.cat([torch.sin(coords), torch.cos(coords)], dim=-1)

    def _no_mask(self, batch: int) -> torch.Tensor:
        return self.no_mask.reshape(1, -1, 1, 1).expand(batch, -1, self.height, self.width)

    @torch.jit.export
    def dense_pe(self) -> torch.Tensor:
        return self.pe

    @torch.jit.export
    def embed_none(self, batch: int) -> Tuple[torch.Tensor, torch.Tensor]:
        sparse = torch.zeros((batch, 0, self.embed_dim), dtype=self.no_mask.dtype)
        return sparse, self._no_mask(batch)

    @torch.jit.export
    def embed_points(self, coords: torch.Tensor,
                     labels: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        batch = coords.size(0)
        points = torch.cat([coords.float() + 0.5, torch.zeros((batch, 1, 2))], dim=1)
        labels = torch.cat([labels.long(), -torch.ones((batch, 1), dtype=torch.long)], dim=1)
        points = torch.stack([points[:, :, 0] / self.input_w, points[:, :, 1] / self.input_h], -1)
        emb = self._encode(points)
        pad = (labels == -1).unsqueeze(-1)
        emb = torch.where(pad, self.not_a_point.expand_as(emb), emb)
        emb = emb + (labels == 0).unsqueeze(-1).float() * self.negative
        emb = emb + (labels == 1).unsqueeze(-1).float() * self.positive
        return emb, self._no_mask(batch)

    @torch.jit.export
    def embed_mask(self, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        sparse = torch.zeros((mask.size(0), 0, self.embed_dim), dtype=mask.dtype)
        return sparse, self.mask_downscaling(mask)

    def forward(self, batch: int) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.embed_none(batch)


class MaskDecoder(nn.Module):
    def __init__(self, decoder: nn.Module):
        super().__init__()
        self.decoder = decoder

    def forward(self, emb, pe, sparse, dense):
        masks, iou = self.decoder(emb, pe, sparse, dense, multimask_output=False)
        return masks, iou


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model-type", default="vit_h", choices=sorted(sam_model_registry))
    parser.add_argument("--checkpoint", default=None)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    sam = sam_model_registry[args.model_type](checkpoint=args.checkpoint).eval()
    side = sam.image_encoder.img_size
    dim = sam.prompt_encoder.embed_dim
    grid = sam.prompt_encoder.image_embedding_size
    os.makedirs(args.out, exist_ok=True)

    with torch.no_grad():
        image = torch.jit.trace(sam.image_encoder, torch.zeros(1, 3, side, side))
        image.save(os.path.join(args.out, "image_encoder.pt"))

        prompt = torch.jit.script(PromptEncoder(sam.prompt_encoder).eval())
        prompt.save(os.path.join(args.out, "prompt_encoder.pt"))

        example = (torch.zeros(1, dim, *grid), torch.zeros(1, dim, *grid),
                   torch.zeros(1, 2, dim), torch.zeros(1, dim, *grid))
        decoder = torch.jit.trace(MaskDecoder(sam.mask_decoder).eval(), example,
                                  check_trace=False)
        decoder.save(os.path.join(args.out, "mask_decoder.pt"))


if __name__ == "__main__":
    main()
