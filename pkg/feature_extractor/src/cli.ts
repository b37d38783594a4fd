#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { availableBackbones } from "./backbone.js";
import { extractFeatures } from "./extract.js";

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName("extract")
    .command(
      "$0",
      "Extract appearance features from an image manifest into a VPCF file",
      (y) =>
        y
          .option("manifest", {
            type: "string",
            demandOption: true,
            describe: "CSV of sample_id,image_path rows; row order defines feature order",
          })
          .option("backbone", {
            type: "string",
            demandOption: true,
            choices: availableBackbones(),
            describe: "feature backbone",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output VPCF path",
          })
          .option("trajectory", {
            type: "string",
            describe: "optional trajectory CSV whose sample ids must match the manifest",
          }),
    )
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new UsageError(msg);
    });

  try {
    const args = await parser.parse();
    const { nRows, dim } = extractFeatures({
      manifestPath: args.manifest as string,
      backboneName: args.backbone as string,
      outPath: args.out as string,
      trajectoryPath: args.trajectory as string | undefined,
    });
    console.log(`wrote ${nRows} x ${dim} features to ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`extract: ${(err as Error).message}`);
    return err instanceof UsageError ? 2 : 1;
  }
}

class UsageError extends Error {}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
