/**
 * Browser entry point: wires toolbar controls and SVG click delegation to the
 * controller. Expects the investigation service on the same origin (use the
 * server's port or a dev proxy).
 */

import { FetchTransport, ServiceClient } from "./client.js";
import { Controller, DEFAULT_FRAME_MS, ViewState } from "./controller.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function show(target: HTMLElement, message: string | null): void {
  target.textContent = message ?? "";
  target.style.display = message ? "block" : "none";
}

function renderState(state: ViewState): void {
  el("frame").innerHTML = state.svg ?? '<p class="empty">no frame yet</p>';
  show(el("banner"), state.banner);
  show(el("toast"), state.toast);
  show(el("notice"), state.notice);
  const s = state.session;
  el("status").textContent = s
    ? `session ${s.session_id.slice(0, 8)} | ${s.status} | mode ${s.mode} | ` +
      `frame ${s.cursor + 1}/${s.playlist_length} | additions ${s.additions}` +
      (s.focus ? ` | focus ${s.focus}` : "")
    : "no session";
}

function main(): void {
  // ?api=http://host:port points the console at a service on another origin.
  const api = new URLSearchParams(location.search).get("api") ?? "";
  const client = new ServiceClient(new FetchTransport(api));
  const controller = new Controller(client, { onChange: renderState });

  el("new-session").addEventListener("click", () => {
    const threshold = Number((el<HTMLInputElement>("threshold")).value);
    void controller.createSession(threshold);
  });
  el("start").addEventListener("click", () => void controller.start());
  el("pause").addEventListener("click", () => void controller.pause());
  el("resume").addEventListener("click", () => void controller.resume());
  el("stop").addEventListener("click", () => void controller.stop());
  el("next").addEventListener("click", () => void controller.next());
  el("mode").addEventListener("click", () => void controller.toggleMode());

  el("threshold").addEventListener("change", () => {
    const threshold = Number((el<HTMLInputElement>("threshold")).value);
    void controller.setThreshold(threshold);
  });

  const speed = el<HTMLInputElement>("speed");
  speed.value = String(DEFAULT_FRAME_MS / 1000);
  speed.addEventListener("change", () => {
    controller.setPlaybackMs(Number(speed.value) * 1000);
  });

  el("frame").addEventListener("click", (event) => {
    const target = (event.target as Element | null)?.closest("[data-kind]");
    const id = target?.getAttribute("data-id");
    const kind = target?.getAttribute("data-kind");
    if (!id || !kind) return;
    if (kind.startsWith("cluster")) {
      void controller.clickCluster(id);
    } else {
      void controller.clickNode(id);
    }
  });

  renderState(controller.state);
}

main();
