/**
 * Sidecar rendering. One sentence block per utterance keyed by a
 * `# utterance_id = ...` comment, 10 tab-separated columns per token,
 * blank line between blocks. Utterances that would not align emit a
 * comment-only block with `# alignment = failed`, which the consuming
 * loader skips; the annotation is absent rather than wrong.
 */

import type { DepToken } from "./pos";

export type Block =
  | { utteranceId: string; tokens: DepToken[] }
  | { utteranceId: string; failed: string };

export function renderBlock(b: Block): string {
  const lines = [`# utterance_id = ${b.utteranceId}`];
  if ("failed" in b) {
    lines.push(`# alignment = failed (${b.failed})`);
  } else {
    b.tokens.forEach((t, i) => {
      lines.push(
        [
          String(i + 1),
          t.form,
          t.form.toLowerCase(),
          t.pos,
          "_",
          "_",
          String(t.head),
          t.deprel,
          "_",
          "_",
        ].join("\t"),
      );
    });
  }
  return lines.join("\n") + "\n";
}

export function renderSidecar(blocks: Block[], pipeline: string): string {
  const header = `# generator = da-annotation-adapter\n# pipeline = ${pipeline}\n`;
  if (blocks.length === 0) return header;
  return header + "\n" + blocks.map(renderBlock).join("\n");
}
