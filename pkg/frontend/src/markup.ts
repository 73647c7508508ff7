// ============================================
// INLINE EDIT MARKUP
// ============================================
//
// Turns a sentence's token list plus its suggested edits into a flat list
// of whole-token pieces: kept tokens, struck-through deletions, highlighted
// insertions. One piece is always one token — never a fragment of one —
// so the rendering cannot produce "letters and parts of words" artifacts.

import type { EditView } from "./types.js";

export type PieceKind = "keep" | "del" | "ins";

export interface MarkupPiece {
  kind: PieceKind;
  token: string;
  /** The edit this piece belongs to; kept tokens have none. */
  editId?: string;
}

/**
 * Build the markup for one sentence.
 *
 * Edits anchor at token indices of the unrevised sentence and never
 * overlap (server guarantee), so a single left-to-right walk suffices.
 */
export function sentenceMarkup(
  tokens: string[],
  edits: EditView[],
): MarkupPiece[] {
  const sorted = [...edits].sort((a, b) => a.anchor - b.anchor);
  const pieces: MarkupPiece[] = [];
  let cursor = 0;

  for (const edit of sorted) {
    while (cursor < edit.anchor && cursor < tokens.length) {
      pieces.push({ kind: "keep", token: tokens[cursor]! });
      cursor += 1;
    }
    for (const token of edit.old_tokens) {
      pieces.push({ kind: "del", token, editId: edit.edit_id });
    }
    for (const token of edit.new_tokens) {
      pieces.push({ kind: "ins", token, editId: edit.edit_id });
    }
    cursor += edit.old_tokens.length;
  }
  while (cursor < tokens.length) {
    pieces.push({ kind: "keep", token: tokens[cursor]! });
    cursor += 1;
  }
  return pieces;
}

/** The sentence with every edit taken, as a token list. */
export function acceptedTokens(pieces: MarkupPiece[]): string[] {
  return pieces.filter((p) => p.kind !== "del").map((p) => p.token);
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const PIECE_CLASS: Record<PieceKind, string> = {
  keep: "tok",
  del: "tok del",
  ins: "tok ins",
};

export function markupHtml(pieces: MarkupPiece[]): string {
  return pieces
    .map((p) => {
      const ref = p.editId ? ` data-edit="${escapeHtml(p.editId)}"` : "";
      return `<span class="${PIECE_CLASS[p.kind]}"${ref}>${escapeHtml(p.token)}</span>`;
    })
    .join(" ");
}
