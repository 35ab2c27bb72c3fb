/** Render a figure from a JSON figure-spec file: `node dist/cli.js spec.json` */

import { readFileSync, writeFileSync } from "node:fs";
import { render, validateSpec } from "./figure.js";

export function main(argv: string[]): number {
  if (argv.length !== 1) {
    console.error("usage: cli.js <figure-spec.json>");
    return 1;
  }
  let spec;
  try {
    spec = validateSpec(JSON.parse(readFileSync(argv[0], "utf8")));
  } catch (err) {
    console.error(`invalid figure spec: ${(err as Error).message}`);
    return 1;
  }
  try {
    const svg = render(spec);
    writeFileSync(spec.output, svg);
    console.log(spec.output);
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 2;
  }
  return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ?? false;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
