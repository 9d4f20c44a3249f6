/**
 * POS tagging via wink-nlp's English lite model, which emits Universal
 * POS tags, plus a deterministic head/relation heuristic over the merged
 * tokens.
 *
 * No compact dependency parser exists for this runtime, so relations are
 * derived from POS: the first verb (else first auxiliary, else first
 * noun, else the first token) is the root and everything else attaches
 * to it with a POS-typed relation. The downstream model treats relations
 * as opaque feature strings, and the scheme name goes into the sidecar
 * header so models stay tagset-consistent end to end.
 */

import model from "wink-eng-lite-web-model";
import winkNLP from "wink-nlp";

const nlp = winkNLP(model, ["pos"]);
const its = nlp.its;

export const PIPELINE = `wink-nlp/wink-eng-lite-web-model upos, deprel heuristic pos-v1`;

export type Piece = { form: string; pos: string };

/** Tool tokenization of one utterance with a UPOS tag per piece. */
export function tagPieces(text: string): Piece[] {
  const doc = nlp.readDoc(text);
  const forms = doc.tokens().out(its.value) as string[];
  const tags = doc.tokens().out(its.pos) as string[];
  return forms.map((form, i) => ({ form, pos: tags[i] ?? "X" }));
}

const DEPREL: Record<string, string> = {
  ADJ: "amod",
  ADP: "case",
  ADV: "advmod",
  AUX: "aux",
  CCONJ: "cc",
  DET: "det",
  INTJ: "discourse",
  NOUN: "dep",
  NUM: "nummod",
  PART: "mark",
  PRON: "nsubj",
  PROPN: "dep",
  PUNCT: "punct",
  SCONJ: "mark",
  SYM: "dep",
  VERB: "xcomp",
  X: "dep",
};

export type DepToken = { form: string; pos: string; head: number; deprel: string };

/** Assigns heads (1-based, 0 = root) and relations to merged tokens. */
export function assignDeps(tokens: { form: string; pos: string }[]): DepToken[] {
  let root = tokens.findIndex((t) => t.pos === "VERB");
  if (root < 0) root = tokens.findIndex((t) => t.pos === "AUX");
  if (root < 0) root = tokens.findIndex((t) => t.pos === "NOUN" || t.pos === "PROPN");
  if (root < 0) root = 0;
  return tokens.map((t, i) => ({
    form: t.form,
    pos: t.pos,
    head: i === root ? 0 : root + 1,
    deprel: i === root ? "root" : DEPREL[t.pos] ?? "dep",
  }));
}
