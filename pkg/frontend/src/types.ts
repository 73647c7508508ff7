// ============================================
// WIRE TYPES (/api/v1)
// ============================================

export type EditKind = "insert" | "delete" | "replace";

export type Intention = "fluency" | "coherence" | "clarity" | "style";

export type Verdict = "accept" | "reject";

export interface DocumentSummary {
  doc_id: string;
  domain: string;
  n_sentences: number;
  preview: string;
}

export interface TokenView {
  surface: string;
  span: [number, number];
}

export interface SentenceView {
  index: number;
  span: [number, number];
  tokens: TokenView[];
}

export interface DocumentView {
  doc_id: string;
  domain_tag: string;
  text: string;
  sentences: SentenceView[];
}

export interface EditView {
  edit_id: string;
  sentence_index: number;
  kind: EditKind;
  old_tokens: string[];
  new_tokens: string[];
  anchor: number;
  intention: Intention;
  status: string;
}

export interface DecisionView {
  edit_id: string;
  verdict: Verdict;
  reviewer_id: string;
  timestamp: string;
}

export interface StepView {
  depth: number;
  source: DocumentView;
  proposed_edits: EditView[];
  decisions: DecisionView[];
  result: DocumentView | null;
}

/** GET /sessions/{id} — the reviewer-facing session. The server strips
 * every field that could identify what produced the edits. */
export interface SessionView {
  session_id: string;
  state: "awaiting_proposal" | "awaiting_decisions" | "completed";
  config: { t_max: number; suppress_previously_rejected: boolean };
  original: DocumentView;
  steps: StepView[];
}

export interface ProposeResponse {
  completed?: boolean;
  depth: number;
  final_text?: string;
  edits?: (EditView & { before_preview: string; after_preview: string })[];
}

export interface DecisionsResponse {
  undecided: string[];
}

export interface AdvanceResponse {
  state: string;
  final_text?: string;
  next_depth?: number;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
