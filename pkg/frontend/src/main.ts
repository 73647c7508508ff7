// ============================================
// BOOTSTRAP
// ============================================

import { ApiClient } from "./api.js";
import { ReviewApp } from "./app.js";
import { LocalState } from "./localState.js";

declare global {
  interface Window {
    /** Override the API base URL (defaults to same-origin /api/v1). */
    REVLOOP_API_BASE?: string;
  }
}

const mount = document.getElementById("app");
if (!mount) throw new Error("missing #app mount point");

const app = new ReviewApp(
  mount,
  new ApiClient(window.REVLOOP_API_BASE ?? "/api/v1"),
  new LocalState(window.localStorage),
);
void app.start();
