/**
 * Image manifest: an ordered CSV of (sample_id, image_path) whose row order
 * defines the feature-file row order. When a companion trajectory CSV is
 * supplied, its sample ids must match the manifest's exactly and in order.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export class ManifestError extends Error {}

export interface ManifestEntry {
  sampleId: number;
  imagePath: string;
}

function splitCsvLine(line: string): string[] {
  return line.split(",").map((f) => f.trim());
}

export function loadManifest(manifestPath: string): ManifestEntry[] {
  let text: string;
  try {
    text = fs.readFileSync(manifestPath, "utf-8");
  } catch (err) {
    throw new ManifestError(`cannot read manifest ${manifestPath}: ${(err as Error).message}`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new ManifestError(`manifest ${manifestPath} is empty`);

  const header = splitCsvLine(lines[0]);
  if (header[0] !== "sample_id" || header[1] !== "image_path") {
    throw new ManifestError(
      `manifest header must be "sample_id,image_path", got "${lines[0]}"`,
    );
  }

  const dir = path.dirname(manifestPath);
  const seen = new Set<number>();
  return lines.slice(1).map((line, i) => {
    const fields = splitCsvLine(line);
    if (fields.length < 2) {
      throw new ManifestError(`manifest line ${i + 2}: expected 2 fields, got ${fields.length}`);
    }
    const sampleId = Number(fields[0]);
    if (!Number.isInteger(sampleId) || sampleId < 0) {
      throw new ManifestError(`manifest line ${i + 2}: bad sample_id "${fields[0]}"`);
    }
    if (seen.has(sampleId)) {
      throw new ManifestError(`manifest line ${i + 2}: duplicate sample_id ${sampleId}`);
    }
    seen.add(sampleId);
    // relative image paths resolve against the manifest's own directory
    const imagePath = path.isAbsolute(fields[1]) ? fields[1] : path.join(dir, fields[1]);
    return { sampleId, imagePath };
  });
}

/** Ids from a trajectory CSV (first column after the header), in file order. */
export function loadTrajectoryIds(trajectoryPath: string): number[] {
  let text: string;
  try {
    text = fs.readFileSync(trajectoryPath, "utf-8");
  } catch (err) {
    throw new ManifestError(`cannot read trajectory ${trajectoryPath}: ${(err as Error).message}`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0 || splitCsvLine(lines[0])[0] !== "sample_id") {
    throw new ManifestError(`${trajectoryPath} does not look like a trajectory CSV`);
  }
  return lines.slice(1).map((line, i) => {
    const id = Number(splitCsvLine(line)[0]);
    if (!Number.isInteger(id) || id < 0) {
      throw new ManifestError(`trajectory line ${i + 2}: bad sample_id`);
    }
    return id;
  });
}

export function checkIdsMatchTrajectory(entries: ManifestEntry[], trajectoryIds: number[]): void {
  const manifestIds = entries.map((e) => e.sampleId);
  if (
    manifestIds.length !== trajectoryIds.length ||
    manifestIds.some((id, i) => id !== trajectoryIds[i])
  ) {
    throw new ManifestError(
      `manifest sample ids do not match the trajectory's ` +
        `(${manifestIds.length} manifest rows vs ${trajectoryIds.length} trajectory rows)`,
    );
  }
}
