/**
 * Reconciles a tool's tokenization with the whitespace tokens the tagger
 * treats as ground truth.
 *
 * The reference tokens come from splitting normalized text on spaces; the
 * tool may cut finer (contractions, clitics) but its pieces must
 * concatenate back to the reference tokens exactly. Alignment is a greedy
 * left-to-right prefix match, and anything that does not reassemble cleanly
 * is a failure for the whole utterance: the caller marks it instead of
 * guessing, so a misalignment is never silent.
 */

export type Alignment = number[][];

/**
 * Groups piece indices under the reference token they reassemble.
 *
 * Returns one index list per reference token, or null when the pieces do
 * not concatenate to the references in order. Empty pieces are ignored.
 */
export function alignPieces(refs: string[], pieces: string[]): Alignment | null {
  // indices refer to the caller's array; empty pieces are skipped but
  // never shift the numbering
  const parts: { text: string; idx: number }[] = [];
  pieces.forEach((p, idx) => {
    if (p.length > 0) parts.push({ text: p, idx });
  });
  const out: Alignment = [];
  let pi = 0;
  for (const ref of refs) {
    const group: number[] = [];
    let built = "";
    while (built.length < ref.length) {
      if (pi >= parts.length) return null;
      const piece = parts[pi].text;
      if (ref.slice(built.length, built.length + piece.length) !== piece) {
        return null; // piece straddles a boundary or plain mismatch
      }
      built += piece;
      group.push(parts[pi].idx);
      pi++;
    }
    if (built !== ref) return null;
    out.push(group);
  }
  if (pi !== parts.length) return null; // leftover pieces
  return out;
}

export type PieceTags = { pos: string; };

/**
 * Collapses the tags of a piece group to one annotation per reference
 * token. A multi-piece token takes the first piece's tags: for English
 * contractions the first piece is the lexical host ("let" in "let's",
 * "do" in "do n't") and the trailing clitic is the part worth dropping.
 */
export function mergeGroup<T extends PieceTags>(group: number[], tags: T[]): T {
  return tags[group[0]];
}
