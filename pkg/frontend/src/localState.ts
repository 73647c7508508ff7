// ============================================
// LOCAL REVIEWER STATE
// ============================================
//
// The server knows nothing about who is logged in on this browser; the
// reviewer id, the one-time guidelines acknowledgement, and the mapping
// from document to in-progress session live in localStorage so a reload
// drops the user back where they were.

const KEY = "revloop-ui";

interface Persisted {
  reviewerId: string | null;
  acknowledged: string[];
  sessionByDoc: Record<string, string>;
}

function empty(): Persisted {
  return { reviewerId: null, acknowledged: [], sessionByDoc: {} };
}

export class LocalState {
  private data: Persisted;

  constructor(private readonly storage: Storage) {
    this.data = this.read();
  }

  private read(): Persisted {
    try {
      const raw = this.storage.getItem(KEY);
      if (!raw) return empty();
      const parsed = JSON.parse(raw) as Partial<Persisted>;
      return {
        reviewerId: typeof parsed.reviewerId === "string" ? parsed.reviewerId : null,
        acknowledged: Array.isArray(parsed.acknowledged) ? parsed.acknowledged : [],
        sessionByDoc: parsed.sessionByDoc ?? {},
      };
    } catch {
      return empty();
    }
  }

  private write(): void {
    this.storage.setItem(KEY, JSON.stringify(this.data));
  }

  get reviewerId(): string | null {
    return this.data.reviewerId;
  }

  login(reviewerId: string): void {
    this.data.reviewerId = reviewerId;
    this.write();
  }

  logout(): void {
    this.data.reviewerId = null;
    this.write();
  }

  hasAcknowledged(reviewerId: string): boolean {
    return this.data.acknowledged.includes(reviewerId);
  }

  acknowledge(reviewerId: string): void {
    if (!this.hasAcknowledged(reviewerId)) {
      this.data.acknowledged.push(reviewerId);
      this.write();
    }
  }

  sessionFor(docId: string): string | null {
    return this.data.sessionByDoc[docId] ?? null;
  }

  rememberSession(docId: string, sessionId: string): void {
    this.data.sessionByDoc[docId] = sessionId;
    this.write();
  }

  forgetSession(docId: string): void {
    delete this.data.sessionByDoc[docId];
    this.write();
  }
}
