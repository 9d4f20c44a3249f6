/**
 * Vocabulary-filtered pass-through of a word-per-line embedding file.
 * Kept lines are copied byte for byte: the tagger parses values itself,
 * and reformatting here could perturb them.
 */

export type SubsetResult = {
  lines: string[];
  kept: number;
  dim: number;
};

export function subsetEmbeddings(source: string, vocab: Set<string>): SubsetResult {
  const lines: string[] = [];
  let dim = -1;
  let lineno = 0;
  for (const line of source.split("\n")) {
    lineno++;
    if (!line.trim()) continue;
    const fields = line.split(/\s+/).filter((f) => f.length > 0);
    const d = fields.length - 1;
    if (dim < 0) {
      if (d < 1) throw new Error(`line ${lineno}: no vector values`);
      dim = d;
    } else if (d !== dim) {
      throw new Error(`line ${lineno}: ${d} values, expected ${dim}`);
    }
    if (vocab.has(fields[0])) lines.push(line);
  }
  return { lines, kept: lines.length, dim: dim < 0 ? 0 : dim };
}

/** Whitespace tokens of every non-null normalized text. */
export function vocabOf(texts: (string | null)[]): Set<string> {
  const vocab = new Set<string>();
  for (const t of texts) {
    if (t === null) continue;
    for (const tok of t.split(/\s+/)) if (tok) vocab.add(tok);
  }
  return vocab;
}
