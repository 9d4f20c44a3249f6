/**
 * The annotate pass: tag every utterance, reconcile the tool tokens to
 * whitespace tokens, and emit one sidecar block per utterance.
 */

import { alignPieces, mergeGroup } from "./align";
import type { Block } from "./conllu";
import type { Dialogue } from "./dialogues";
import { assignDeps, Piece, tagPieces } from "./pos";

export type AnnotateStats = {
  blocks: Block[];
  total: number;
  failed: number;
};

export function annotateDialogues(
  dialogues: Dialogue[],
  tagFn: (text: string) => Piece[] = tagPieces,
): AnnotateStats {
  const blocks: Block[] = [];
  let total = 0;
  let failed = 0;
  for (const d of dialogues) {
    for (const u of d.utterances) {
      if (u.normalized_text === null) {
        throw new Error(`${u.utterance_id}: normalized text missing; ` +
          `run the tagger's preprocess step first`);
      }
      total++;
      const refs = u.normalized_text.split(/\s+/).filter((t) => t.length > 0);
      if (refs.length === 0) {
        // nothing to annotate; an id-only block keeps the utterance
        // visible without claiming any tokens
        blocks.push({ utteranceId: u.utterance_id, tokens: [] });
        continue;
      }
      let pieces;
      try {
        pieces = tagFn(u.normalized_text);
      } catch (e) {
        failed++;
        blocks.push({
          utteranceId: u.utterance_id,
          failed: `tool error: ${(e as Error).message}`,
        });
        continue;
      }
      const groups = alignPieces(refs, pieces.map((p) => p.form));
      if (groups === null) {
        failed++;
        blocks.push({
          utteranceId: u.utterance_id,
          failed: "tokenization does not reassemble to whitespace tokens",
        });
        continue;
      }
      const merged = groups.map((g, i) => ({
        form: refs[i],
        pos: mergeGroup(g, pieces).pos,
      }));
      blocks.push({ utteranceId: u.utterance_id, tokens: assignDeps(merged) });
    }
  }
  return { blocks, total, failed };
}
