/** Single-page controller: polls status once a second, opens the scoring
 * panel whenever the run parks for judgment, and drives run controls and the
 * history browser. All server traffic goes through ApiClient. */

import { ApiClient, ApiError, ControlCommand } from "./api.js";
import { generationPanel, historyTable, statusLine } from "./render.js";
import { InvalidQueryError, queryFromForm } from "./query.js";
import {
  clearScore,
  createSheet,
  ScoreSheet,
  setScore,
  SubmissionGate,
} from "./scores.js";
import type { MoleculePayload, RunStatusView, ScaleEntry } from "./types.js";

const POLL_INTERVAL_MS = 1000;

const EXAMPLE_CONFIG = {
  seed: 42,
  archive_path: "ui-run.ndjson",
  elements: ["C", "N", "O"],
  rules: { min_atoms: 2, max_atoms: 12, max_weight: 250.0 },
  fragments: ["[C]=[O]", "[OH]"],
  evolution: {
    population_size: 12,
    iterations: 6,
    mutation_rate_pct: 40.0,
    crossover_rate_pct: 80.0,
  },
  fitness: { target: "[CH3]-[C](=[O])-[OH]" },
  interaction: {
    interval_generations: 2,
    strategy: { kind: "top-n", param: 6 },
  },
};

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.errorName}: ${err.detail}`;
  return err instanceof Error ? err.message : String(err);
}

export class App {
  private readonly api: ApiClient;
  private readonly root: Document;
  private status: RunStatusView | null = null;
  private sheet: ScoreSheet | null = null;
  private molecules: MoleculePayload[] = [];
  private scale: ScaleEntry[] = [];
  private blind = false;
  private focusIndex = 0;
  private gate = new SubmissionGate();
  private panelGeneration: number | null = null;
  private notice = "";

  constructor(api: ApiClient, root: Document = document) {
    this.api = api;
    this.root = root;
  }

  start(): void {
    const configBox = this.byId<HTMLTextAreaElement>("config-input");
    configBox.value = JSON.stringify(EXAMPLE_CONFIG, null, 2);
    this.byId("start-btn").addEventListener("click", () => void this.startRun());
    this.byId("search-btn").addEventListener("click", () => void this.runSearch());
    this.byId("submit-btn").addEventListener("click", () => void this.submitSheet());
    this.byId<HTMLInputElement>("blind-toggle").addEventListener("change", (ev) => {
      this.blind = (ev.target as HTMLInputElement).checked;
      this.renderPanel();
    });
    this.root.addEventListener("click", (ev) => this.onClick(ev));
    this.root.addEventListener("keydown", (ev) => this.onKey(ev));
    void this.tick();
    window.setInterval(() => void this.tick(), POLL_INTERVAL_MS);
  }

  private byId<T extends HTMLElement = HTMLElement>(id: string): T {
    const el = this.root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  }

  // -- polling -----------------------------------------------------------

  private async tick(): Promise<void> {
    let status: RunStatusView;
    try {
      status = await this.api.status();
    } catch (err) {
      this.byId("status-bar").innerHTML = `<span class="reason">unreachable: ${describeError(
        err,
      )}</span>`;
      return;
    }
    this.status = status;
    this.byId("status-bar").innerHTML = statusLine(status);

    if (status.state === "awaiting-scores" && status.awaiting) {
      const generation = status.awaiting.generation;
      if (this.panelGeneration !== generation) {
        await this.openPanel(generation, status.awaiting.scale);
      }
    } else if (this.panelGeneration !== null) {
      this.closePanel();
    }
  }

  private async openPanel(generation: number, scale: ScaleEntry[]): Promise<void> {
    try {
      const body = await this.api.molecules(generation, true);
      this.molecules = body.molecules;
    } catch (err) {
      this.notice = describeError(err);
      this.renderNotice();
      return;
    }
    this.scale = scale;
    this.sheet = createSheet(generation);
    this.panelGeneration = generation;
    this.focusIndex = 0;
    this.notice = "";
    this.byId("scoring").hidden = false;
    this.renderPanel();
  }

  private closePanel(): void {
    this.panelGeneration = null;
    this.sheet = null;
    this.molecules = [];
    this.byId("scoring").hidden = true;
  }

  // -- rendering ---------------------------------------------------------

  private renderPanel(): void {
    if (this.sheet === null || this.panelGeneration === null) return;
    this.byId("cards").innerHTML = generationPanel(
      this.panelGeneration,
      this.molecules,
      this.scale,
      this.sheet.entries,
      { blind: this.blind, focusIndex: this.focusIndex },
    );
    this.renderNotice();
  }

  private renderNotice(): void {
    const el = this.byId("notice");
    el.textContent = this.notice;
    el.hidden = this.notice === "";
  }

  private flash(message: string): void {
    this.notice = message;
    this.renderNotice();
  }

  // -- actions -----------------------------------------------------------

  private async startRun(): Promise<void> {
    const raw = this.byId<HTMLTextAreaElement>("config-input").value;
    let config: unknown;
    try {
      config = JSON.parse(raw);
    } catch (err) {
      this.flash(`config is not valid JSON: ${describeError(err)}`);
      return;
    }
    try {
      const ack = await this.api.startRun(config);
      this.flash(`started ${ack.run_id}`);
    } catch (err) {
      this.flash(describeError(err));
    }
    void this.tick();
  }

  private async control(command: ControlCommand): Promise<void> {
    try {
      await this.api.control(command);
      this.flash(`sent ${command}`);
    } catch (err) {
      this.flash(describeError(err));
    }
    void this.tick();
  }

  private async submitSheet(): Promise<void> {
    if (this.sheet === null) return;
    const outcome = await this.gate.submit(
      (generation, body) => this.api.submitScores(generation, body),
      this.sheet,
    );
    switch (outcome.kind) {
      case "accepted":
        this.flash(`accepted ${outcome.accepted} score(s); run resumes`);
        this.closePanel();
        break;
      case "busy":
        this.flash("a submission is already in flight");
        break;
      case "rejected":
        // leave the sheet intact so the judge can fix and resubmit
        this.flash(`${outcome.error} (${outcome.status}): ${outcome.detail} — press Submit to retry`);
        break;
      case "failed":
        this.flash(`submission failed: ${outcome.message} — press Submit to retry`);
        break;
    }
    void this.tick();
  }

  private async runSearch(): Promise<void> {
    const fields: Record<string, string> = {};
    for (const input of this.byId("history-form").querySelectorAll("input, select")) {
      const el = input as HTMLInputElement | HTMLSelectElement;
      fields[el.name] = el.value;
    }
    try {
      const query = queryFromForm(fields);
      const body = await this.api.search(query);
      this.byId("history-results").innerHTML = historyTable(
        body.records as unknown as Array<Record<string, unknown>>,
      );
    } catch (err) {
      if (err instanceof InvalidQueryError) {
        this.flash(err.message);
      } else {
        this.flash(describeError(err));
      }
    }
  }

  // -- events ------------------------------------------------------------

  private onClick(ev: Event): void {
    const target = ev.target as HTMLElement | null;
    if (!target) return;
    const scoreBtn = target.closest<HTMLElement>("[data-score-btn]");
    if (scoreBtn && this.sheet) {
      const cid = Number(scoreBtn.dataset.cid);
      const value = Number(scoreBtn.dataset.value);
      if (this.sheet.entries.get(cid) === value) {
        clearScore(this.sheet, cid); // clicking the chosen button unsets it
      } else {
        setScore(this.sheet, cid, value, this.scale);
      }
      this.focusIndex = this.molecules.findIndex((m) => m.chromosome_id === cid);
      this.renderPanel();
      return;
    }
    const card = target.closest<HTMLElement>("[data-molecule]");
    if (card && this.sheet) {
      const cid = Number(card.dataset.cid);
      this.focusIndex = this.molecules.findIndex((m) => m.chromosome_id === cid);
      this.renderPanel();
      return;
    }
    const cmd = target.closest<HTMLElement>("[data-cmd]");
    if (cmd) {
      void this.control(cmd.dataset.cmd as ControlCommand);
    }
  }

  /** Digits score the focused molecule; arrows move focus between cards. */
  private onKey(ev: KeyboardEvent): void {
    if (this.sheet === null || this.molecules.length === 0) return;
    const tag = (ev.target as HTMLElement | null)?.tagName ?? "";
    if (tag === "TEXTAREA" || tag === "INPUT" || tag === "SELECT") return;

    if (ev.key === "ArrowRight" || ev.key === "ArrowDown") {
      this.focusIndex = Math.min(this.focusIndex + 1, this.molecules.length - 1);
      this.renderPanel();
      ev.preventDefault();
      return;
    }
    if (ev.key === "ArrowLeft" || ev.key === "ArrowUp") {
      this.focusIndex = Math.max(this.focusIndex - 1, 0);
      this.renderPanel();
      ev.preventDefault();
      return;
    }
    const digit = Number(ev.key);
    if (Number.isInteger(digit) && digit >= 1 && digit <= this.scale.length && digit <= 9) {
      const mol = this.molecules[this.focusIndex];
      if (!mol) return;
      setScore(this.sheet, mol.chromosome_id, this.scale[digit - 1].value, this.scale);
      // advance to the next unscored card so a judge can type straight through
      for (let i = 1; i <= this.molecules.length; i++) {
        const next = (this.focusIndex + i) % this.molecules.length;
        if (!this.sheet.entries.has(this.molecules[next].chromosome_id)) {
          this.focusIndex = next;
          break;
        }
      }
      this.renderPanel();
      ev.preventDefault();
    }
  }
}
