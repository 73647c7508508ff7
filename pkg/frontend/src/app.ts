// ============================================
// REVIEW APP
// ============================================
//
// Single-page flow: login -> guidelines -> document picker -> edit review.
// Every screen transition is driven by a successful API response; error
// responses surface as an inline notice (409 additionally refreshes the
// session so the view never drifts from the server).

import { ApiClient, ApiRequestError, type FetchLike } from "./api.js";
import { LocalState } from "./localState.js";
import { renderMarkdown } from "./markdown.js";
import { markupHtml, sentenceMarkup } from "./markup.js";
import type {
  DocumentSummary,
  EditView,
  SessionView,
  StepView,
  Verdict,
} from "./types.js";

type Screen = "login" | "guidelines" | "picker" | "review" | "complete";

interface LocalDecision {
  verdict: Verdict | null;
  confirmed: boolean;
}

export interface AppOptions {
  guidelinesUrl?: string;
  /** Static-file fetch (guidelines); defaults to the page's fetch. */
  fetchFn?: FetchLike;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class ReviewApp {
  private screen: Screen = "login";
  private notice = "";
  private busy = false;
  private inflight: Promise<void> = Promise.resolve();

  private documents: DocumentSummary[] = [];
  private guidelinesHtml = "";
  private session: SessionView | null = null;
  private docId: string | null = null;
  private decisions = new Map<string, LocalDecision>();
  /** Server's undecided list from the last Submit; null = not submitted. */
  private undecided: string[] | null = null;
  private finalText = "";
  private finalDepth = 0;

  private readonly guidelinesUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ApiClient,
    private readonly state: LocalState,
    options: AppOptions = {},
  ) {
    this.guidelinesUrl = options.guidelinesUrl ?? "guidelines.md";
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.container.addEventListener("click", (ev) => this.onClick(ev));
  }

  /** Resolves when the action triggered by the last click has settled. */
  whenIdle(): Promise<void> {
    return this.inflight;
  }

  start(): Promise<void> {
    const reviewer = this.state.reviewerId;
    if (!reviewer) {
      this.screen = "login";
      this.render();
      return Promise.resolve();
    }
    this.queue(() => this.enterAfterLogin(reviewer));
    return this.whenIdle();
  }

  // ------------------------------------------------------------------
  // Event dispatch
  // ------------------------------------------------------------------

  private onClick(ev: Event): void {
    const target = (ev.target as HTMLElement).closest<HTMLElement>(
      "[data-action]",
    );
    if (!target || (target as HTMLButtonElement).disabled) return;
    const action = target.dataset.action;

    switch (action) {
      case "login":
        this.doLogin();
        break;
      case "acknowledge":
        this.doAcknowledge();
        break;
      case "pick":
        this.doPick(target.dataset.doc ?? "");
        break;
      case "verdict":
        this.doVerdict(target.dataset.edit ?? "", target.dataset.verdict as Verdict);
        break;
      case "confirm":
        this.doConfirm(target.dataset.edit ?? "");
        break;
      case "submit":
        this.doSubmit();
        break;
      case "advance":
        this.doAdvance();
        break;
      case "to-picker":
        this.queue(() => this.openPicker());
        break;
    }
  }

  /** Runs one mutating action at a time; concurrent clicks are dropped. */
  private queue(fn: () => Promise<void>): void {
    if (this.busy) return;
    this.busy = true;
    this.notice = "";
    this.render();
    this.inflight = fn()
      .catch((err) => this.handleError(err))
      .finally(() => {
        this.busy = false;
        this.render();
      });
  }

  private async handleError(err: unknown): Promise<void> {
    if (err instanceof ApiRequestError) {
      const ids = err.details["edit_ids"];
      const suffix = Array.isArray(ids) ? `: ${ids.join(", ")}` : "";
      this.notice = `${err.message}${suffix}`;
      if (err.status === 409 && this.session) {
        // someone else moved the session; re-sync rather than retry
        this.session = await this.api.getSession(this.session.session_id);
        this.seedDecisions();
      }
      return;
    }
    this.notice = err instanceof Error ? err.message : String(err);
  }

  // ------------------------------------------------------------------
  // Actions
  // ------------------------------------------------------------------

  private doLogin(): void {
    const input = this.container.querySelector<HTMLInputElement>("#reviewer-input");
    const id = (input?.value ?? "").trim();
    if (!id) {
      this.notice = "Enter a reviewer id to continue.";
      this.render();
      return;
    }
    this.state.login(id);
    this.queue(() => this.enterAfterLogin(id));
  }

  private async enterAfterLogin(reviewer: string): Promise<void> {
    if (this.state.hasAcknowledged(reviewer)) {
      await this.openPicker();
    } else {
      await this.openGuidelines();
    }
  }

  private async openGuidelines(): Promise<void> {
    const res = await this.fetchFn(this.guidelinesUrl);
    if (!res.ok) throw new Error(`guidelines unavailable (${res.status})`);
    this.guidelinesHtml = renderMarkdown(await res.text());
    this.screen = "guidelines";
  }

  private doAcknowledge(): void {
    const reviewer = this.state.reviewerId;
    if (!reviewer) return;
    this.state.acknowledge(reviewer);
    this.queue(() => this.openPicker());
  }

  private async openPicker(): Promise<void> {
    this.documents = (await this.api.listDocuments()).documents;
    this.session = null;
    this.docId = null;
    this.screen = "picker";
  }

  private doPick(docId: string): void {
    if (!docId) return;
    this.queue(() => this.openDocument(docId));
  }

  private async openDocument(docId: string): Promise<void> {
    this.docId = docId;
    this.session = null;

    const known = this.state.sessionFor(docId);
    if (known) {
      try {
        this.session = await this.api.getSession(known);
      } catch (err) {
        if (!(err instanceof ApiRequestError && err.status === 404)) throw err;
        this.state.forgetSession(docId);
      }
    }
    if (!this.session) {
      const created = await this.api.createSession(docId);
      this.state.rememberSession(docId, created.session_id);
      this.session = await this.api.getSession(created.session_id);
    }

    if (this.session.state === "awaiting_proposal") {
      const res = await this.api.propose(this.session.session_id);
      if (res.completed) {
        this.completeLocally(res.final_text ?? "", res.depth);
        return;
      }
      this.session = await this.api.getSession(this.session.session_id);
    }

    if (this.session.state === "completed") {
      const last = this.currentStep();
      this.completeLocally(
        last?.result?.text ?? this.session.original.text,
        last?.depth ?? 0,
      );
      return;
    }
    this.seedDecisions();
    this.screen = "review";
  }

  private doVerdict(editId: string, verdict: Verdict): void {
    const entry = this.decisions.get(editId);
    if (!entry || this.submittedClean()) return;
    entry.verdict = verdict;
    entry.confirmed = false;
    this.render();
  }

  private doConfirm(editId: string): void {
    const entry = this.decisions.get(editId);
    if (!entry || !entry.verdict || this.submittedClean()) return;
    entry.confirmed = true;
    this.render();
  }

  private doSubmit(): void {
    const pending = this.unconfirmedIds();
    if (pending.length) {
      this.notice = `Confirm every edit before submitting. Undecided: ${pending.join(", ")}`;
      this.render();
      return;
    }
    const session = this.session;
    const reviewer = this.state.reviewerId;
    if (!session || !reviewer) return;
    const body = [...this.decisions.entries()].map(([edit_id, d]) => ({
      edit_id,
      verdict: d.verdict as Verdict,
    }));
    this.queue(async () => {
      const res = await this.api.submitDecisions(session.session_id, reviewer, body);
      this.undecided = res.undecided;
      if (res.undecided.length) {
        this.notice = `The server is still missing verdicts for: ${res.undecided.join(", ")}`;
      }
    });
  }

  private doAdvance(): void {
    const session = this.session;
    const docId = this.docId;
    if (!session || !docId || !this.submittedClean()) return;
    this.queue(async () => {
      const adv = await this.api.advance(session.session_id);
      if (adv.state === "completed") {
        this.state.forgetSession(docId);
        this.completeLocally(adv.final_text ?? "", this.currentStep()?.depth ?? 0);
        return;
      }
      const res = await this.api.propose(session.session_id);
      if (res.completed) {
        this.state.forgetSession(docId);
        this.completeLocally(res.final_text ?? "", res.depth);
        return;
      }
      this.session = await this.api.getSession(session.session_id);
      this.seedDecisions();
      this.screen = "review";
    });
  }

  // ------------------------------------------------------------------
  // Derived state
  // ------------------------------------------------------------------

  private currentStep(): StepView | null {
    const steps = this.session?.steps ?? [];
    return steps.length ? steps[steps.length - 1]! : null;
  }

  /** Rebuild the per-edit local state from the authoritative session. */
  private seedDecisions(): void {
    this.decisions = new Map();
    this.undecided = null;
    const step = this.currentStep();
    for (const edit of step?.proposed_edits ?? []) {
      if (edit.status === "accepted" || edit.status === "rejected") {
        this.decisions.set(edit.edit_id, {
          verdict: edit.status === "accepted" ? "accept" : "reject",
          confirmed: true,
        });
      } else {
        this.decisions.set(edit.edit_id, { verdict: null, confirmed: false });
      }
    }
  }

  private unconfirmedIds(): string[] {
    return [...this.decisions.entries()]
      .filter(([, d]) => !d.confirmed)
      .map(([id]) => id);
  }

  private submittedClean(): boolean {
    return this.undecided !== null && this.undecided.length === 0;
  }

  private completeLocally(finalText: string, depth: number): void {
    this.finalText = finalText;
    this.finalDepth = depth;
    if (this.docId) this.state.forgetSession(this.docId);
    this.screen = "complete";
  }

  // ------------------------------------------------------------------
  // Rendering
  // ------------------------------------------------------------------

  private render(): void {
    let body: string;
    switch (this.screen) {
      case "login":
        body = this.renderLogin();
        break;
      case "guidelines":
        body = this.renderGuidelines();
        break;
      case "picker":
        body = this.renderPicker();
        break;
      case "review":
        body = this.renderReview();
        break;
      case "complete":
        body = this.renderComplete();
        break;
    }
    const notice = this.notice
      ? `<p class="notice" role="alert">${escapeHtml(this.notice)}</p>`
      : `<p class="notice" role="alert" hidden></p>`;
    this.container.innerHTML = `<main class="screen screen-${this.screen}">${body}${notice}</main>`;

    if (this.screen === "guidelines") {
      const target = this.container.querySelector("#guidelines-body");
      if (target) target.innerHTML = this.guidelinesHtml;
    }
  }

  private renderLogin(): string {
    return `
      <h1>Revision review</h1>
      <label for="reviewer-input">Reviewer id</label>
      <input id="reviewer-input" type="text" autocomplete="username" />
      <button data-action="login"${this.busy ? " disabled" : ""}>Log in</button>`;
  }

  private renderGuidelines(): string {
    return `
      <h1>Guidelines</h1>
      <div id="guidelines-body"></div>
      <button data-action="acknowledge"${this.busy ? " disabled" : ""}>
        I have read the guidelines
      </button>`;
  }

  private renderPicker(): string {
    const rows = this.documents.length
      ? this.documents
          .map(
            (d) => `
        <li>
          <button data-action="pick" data-doc="${escapeHtml(d.doc_id)}"${this.busy ? " disabled" : ""}>
            ${escapeHtml(d.preview)}
          </button>
          <span class="meta">${escapeHtml(d.domain)} · ${d.n_sentences} sentence(s)</span>
        </li>`,
          )
          .join("")
      : `<li class="hint">No documents yet. Add one through the API to start reviewing.</li>`;
    return `
      <h1>Pick a document</h1>
      <ul class="documents">${rows}</ul>`;
  }

  private renderReview(): string {
    const session = this.session;
    const step = this.currentStep();
    if (!session || !step) return `<p class="hint">No active session.</p>`;

    const byIndex = new Map<number, EditView[]>();
    for (const edit of step.proposed_edits) {
      const list = byIndex.get(edit.sentence_index) ?? [];
      list.push(edit);
      byIndex.set(edit.sentence_index, list);
    }
    const sentences = step.source.sentences
      .map((s) => {
        const pieces = sentenceMarkup(
          s.tokens.map((t) => t.surface),
          byIndex.get(s.index) ?? [],
        );
        return `<span class="sentence" data-sentence="${s.index}">${markupHtml(pieces)}</span>`;
      })
      .join(" ");

    const cards = step.proposed_edits.map((e) => this.renderEditCard(e)).join("");
    const locked = this.submittedClean();
    const submitDisabled = this.busy || locked || !step.proposed_edits.length;
    const advanceDisabled = this.busy || !locked;

    return `
      <header>
        <h1>${escapeHtml(step.source.doc_id)}</h1>
        <p class="depth" data-depth="${step.depth}">
          Revision depth ${step.depth} of ${session.config.t_max}
        </p>
      </header>
      <section class="document" aria-label="document with suggested edits">
        ${sentences}
      </section>
      <section class="edits" aria-label="suggested edits">${cards}</section>
      <div class="actions">
        <button data-action="submit"${submitDisabled ? " disabled" : ""}>Submit</button>
        <button data-action="advance"${advanceDisabled ? " disabled" : ""}>Next Iteration</button>
      </div>`;
  }

  private renderEditCard(edit: EditView): string {
    const d = this.decisions.get(edit.edit_id);
    const locked = this.submittedClean();
    const pieces = sentenceMarkup(edit.old_tokens, [{ ...edit, anchor: 0 }]);
    const toggle = (verdict: Verdict, label: string) => {
      const pressed = d?.verdict === verdict;
      const disabled = this.busy || locked;
      return `<button data-action="verdict" data-edit="${escapeHtml(edit.edit_id)}"
        data-verdict="${verdict}" aria-pressed="${pressed}"
        class="verdict${pressed ? " selected" : ""}"${disabled ? " disabled" : ""}>${label}</button>`;
    };
    const confirmDisabled = this.busy || locked || !d?.verdict || d.confirmed;
    const status = d?.confirmed
      ? `<span class="confirmed">Confirmed: ${d.verdict}</span>`
      : `<span class="pending">Undecided</span>`;
    return `
      <article class="edit" data-edit="${escapeHtml(edit.edit_id)}">
        <span class="intention intention-${edit.intention}">${edit.intention}</span>
        <span class="kind">${edit.kind}</span>
        <span class="snippet">${markupHtml(pieces)}</span>
        ${toggle("accept", "Accept")}
        ${toggle("reject", "Reject")}
        <button data-action="confirm" data-edit="${escapeHtml(edit.edit_id)}"${
          confirmDisabled ? " disabled" : ""
        }>Confirm</button>
        ${status}
      </article>`;
  }

  private renderComplete(): string {
    return `
      <h1>Revision complete</h1>
      <p class="depth-summary">Finished after depth ${this.finalDepth}.</p>
      <blockquote class="final-text">${escapeHtml(this.finalText)}</blockquote>
      <button data-action="to-picker"${this.busy ? " disabled" : ""}>
        Review another document
      </button>`;
  }
}
