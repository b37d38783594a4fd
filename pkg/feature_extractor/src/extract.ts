/**
 * Orchestration: manifest in, VPCF feature file out, one row per manifest
 * entry in manifest order. A sidecar text file next to the output records
 * which activation variant the backbone emitted.
 */

import * as fs from "node:fs";

import { createBackbone } from "./backbone.js";
import { checkIdsMatchTrajectory, loadManifest, loadTrajectoryIds } from "./manifest.js";
import { encodeVpcf } from "./vpcf.js";

export interface ExtractOptions {
  manifestPath: string;
  backboneName: string;
  outPath: string;
  /** Optional companion trajectory CSV; ids must match the manifest's. */
  trajectoryPath?: string;
}

export function extractFeatures(opts: ExtractOptions): { nRows: number; dim: number } {
  const entries = loadManifest(opts.manifestPath);
  if (opts.trajectoryPath !== undefined) {
    checkIdsMatchTrajectory(entries, loadTrajectoryIds(opts.trajectoryPath));
  }
  const backbone = createBackbone(opts.backboneName);
  const rows = entries.map((entry) => backbone.extract(entry.imagePath));

  fs.writeFileSync(opts.outPath, encodeVpcf(rows, backbone.dim));
  const note =
    `backbone: ${backbone.name}\n` +
    `dim: ${backbone.dim}\n` +
    `activation_variant: ${backbone.activationVariant}\n` +
    `rows: ${rows.length}\n`;
  fs.writeFileSync(`${opts.outPath}.note.txt`, note);
  return { nRows: rows.length, dim: backbone.dim };
}
