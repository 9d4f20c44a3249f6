#!/usr/bin/env node
/**
 * da-annotate: sidecar and embedding-subset production for the
 * dialogue-act tagger.
 *
 *   da-annotate annotate --in dialogues.jsonl --out sidecar.conllu
 *   da-annotate subset-embeddings --source vectors.txt --out subset.txt \
 *       [--vocab words.txt] [--from-dialogues dialogues.jsonl]
 *
 * Exit 0 on success; 1 on usage or data errors, and after an annotate
 * run where more than 1% of utterances failed to align.
 */

import * as fs from "fs";
import * as path from "path";
import { parseArgs } from "util";

import { annotateDialogues } from "./annotate";
import { renderSidecar } from "./conllu";
import { readDialogues } from "./dialogues";
import { subsetEmbeddings, vocabOf } from "./embeddings";
import { PIPELINE } from "./pos";

const MAX_FAIL_RATE = 0.01;

function writeOut(file: string, content: string) {
  fs.mkdirSync(path.dirname(path.resolve(file)), { recursive: true });
  fs.writeFileSync(file, content, "utf-8");
}

function cmdAnnotate(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.in || !values.out) {
    throw new Error("annotate needs --in and --out");
  }
  const dialogues = readDialogues(values.in);
  const stats = annotateDialogues(dialogues);
  writeOut(values.out, renderSidecar(stats.blocks, PIPELINE));
  console.error(
    `annotated ${stats.total - stats.failed}/${stats.total} utterances` +
      (stats.failed ? `, ${stats.failed} alignment failures` : ""),
  );
  if (stats.total > 0 && stats.failed / stats.total > MAX_FAIL_RATE) {
    console.error(
      `failure rate ${((100 * stats.failed) / stats.total).toFixed(1)}% ` +
        `exceeds ${100 * MAX_FAIL_RATE}%`,
    );
    return 1;
  }
  return 0;
}

function cmdSubset(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      source: { type: "string" },
      out: { type: "string" },
      vocab: { type: "string" },
      "from-dialogues": { type: "string" },
    },
  });
  if (!values.source || !values.out) {
    throw new Error("subset-embeddings needs --source and --out");
  }
  if (!values.vocab && !values["from-dialogues"]) {
    throw new Error("give --vocab and/or --from-dialogues");
  }
  const vocab = new Set<string>();
  if (values.vocab) {
    for (const w of fs.readFileSync(values.vocab, "utf-8").split("\n")) {
      if (w.trim()) vocab.add(w.trim());
    }
  }
  if (values["from-dialogues"]) {
    const texts = readDialogues(values["from-dialogues"]).flatMap((d) =>
      d.utterances.map((u) => u.normalized_text),
    );
    for (const w of vocabOf(texts)) vocab.add(w);
  }
  const source = fs.readFileSync(values.source, "utf-8");
  const result = subsetEmbeddings(source, vocab);
  writeOut(
    values.out,
    result.lines.length ? result.lines.join("\n") + "\n" : "",
  );
  console.error(
    `kept ${result.kept} of ${vocab.size} vocabulary tokens, dim ${result.dim}`,
  );
  return 0;
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  try {
    if (cmd === "annotate") return cmdAnnotate(rest);
    if (cmd === "subset-embeddings") return cmdSubset(rest);
    throw new Error(
      `usage: da-annotate annotate|subset-embeddings [options]` +
        (cmd ? ` (got ${JSON.stringify(cmd)})` : ""),
    );
  } catch (e) {
    console.error(`da-annotate: ${(e as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
