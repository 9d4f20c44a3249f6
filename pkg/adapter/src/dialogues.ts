/** Minimal reader for the tagger's unified dialogue JSONL files. */

import * as fs from "fs";

export type Utterance = {
  utterance_id: string;
  normalized_text: string | null;
};

export type Dialogue = {
  dialogue_id: string;
  utterances: Utterance[];
};

export function readDialogues(path: string): Dialogue[] {
  const text = fs.readFileSync(path, "utf-8");
  const out: Dialogue[] = [];
  let lineno = 0;
  for (const line of text.split("\n")) {
    lineno++;
    if (!line.trim()) continue;
    let doc: any;
    try {
      doc = JSON.parse(line);
    } catch (e) {
      throw new Error(`${path}:${lineno}: not JSON: ${(e as Error).message}`);
    }
    if (!doc.dialogue_id || !Array.isArray(doc.utterances)) {
      throw new Error(`${path}:${lineno}: not a unified dialogue record`);
    }
    out.push({
      dialogue_id: doc.dialogue_id,
      utterances: doc.utterances.map((u: any) => ({
        utterance_id: u.utterance_id,
        normalized_text: u.normalized_text ?? null,
      })),
    });
  }
  return out;
}
