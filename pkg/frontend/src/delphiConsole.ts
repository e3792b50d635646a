/**
 * Delphi console: per-round submission table, the W gauge with the
 * consensus gate line, the stability badge, and the regulatory-support
 * quadrant chart.
 */

import type { QuadrantResponse, RoundsListing, RoundSummary, Stability } from "./api.js";

export interface GaugeViewModel {
  /** concordance value 0..1 as reported by the API */
  w: number;
  threshold: number;
  gateOpen: boolean;
  label: string;
}

export function gaugeViewModel(summary: RoundSummary): GaugeViewModel {
  const concordance = summary.concordance;
  return {
    w: concordance.w,
    threshold: concordance.threshold,
    gateOpen: concordance.consensus_reached,
    label: concordance.consensus_reached
      ? `consensus reached (W = ${concordance.w.toFixed(2)})`
      : `further round required (W = ${concordance.w.toFixed(2)} < ${concordance.threshold})`,
  };
}

export function renderGauge(vm: GaugeViewModel): string {
  // half-circle gauge: needle angle ∝ W, gate line at the threshold;
  // geometry is integer-pixel so the only decimals in the markup are the
  // API-reported values themselves
  const needle = 180 * vm.w;
  const gate = 180 * vm.threshold;
  const tip = (angle: number, radius: number) => ({
    x: Math.round(100 - radius * Math.cos((angle * Math.PI) / 180)),
    y: Math.round(100 - radius * Math.sin((angle * Math.PI) / 180)),
  });
  const gateTip = tip(gate, 90);
  const needleTip = tip(needle, 80);
  const color = vm.gateOpen ? "#2e7d32" : "#c62828";
  return (
    `<div class="gauge" data-w="${vm.w}" data-gate="${vm.gateOpen ? "open" : "closed"}">` +
    `<svg viewBox="0 0 200 110" width="200" height="110">` +
    `<path d="M10,100 A90,90 0 0 1 190,100" fill="none" stroke="#ddd" stroke-width="14"/>` +
    `<line x1="100" y1="100" x2="${gateTip.x}" y2="${gateTip.y}" stroke="#666" stroke-dasharray="4 3"/>` +
    `<line x1="100" y1="100" x2="${needleTip.x}" y2="${needleTip.y}" stroke="${color}" stroke-width="4"/>` +
    `</svg>` +
    `<div class="gauge-label" style="color:${color}">${vm.label}</div>` +
    `</div>`
  );
}

export function renderStabilityBadge(stability: Stability | null): string {
  if (stability === null) {
    return `<span class="stability-badge" data-stable="unknown">stability: n/a (needs two rounds)</span>`;
  }
  const tone = stability.stable ? "stable" : "unstable";
  return (
    `<span class="stability-badge" data-stable="${tone}">` +
    `rounds ${stability.round_a}→${stability.round_b}: ${tone} ` +
    `(max shift ${stability.max_rank_shift}, bound ${stability.bound})</span>`
  );
}

export function renderRoundTable(listing: RoundsListing): string {
  const rows = listing.rounds
    .map((summary) => {
      const concordance = summary.concordance;
      return (
        `<tr data-round="${summary.round}">` +
        `<td>${summary.round}</td>` +
        `<td data-w>${concordance.w.toFixed(4)}</td>` +
        `<td>${concordance.n_experts}</td>` +
        `<td>${concordance.consensus_reached ? "yes" : "no"}</td>` +
        `<td>${summary.aggregate_ranking.join(" > ")}</td>` +
        `<td>${summary.warnings.join("; ")}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="round-table"><thead><tr>` +
    `<th>round</th><th>W</th><th>experts</th><th>consensus</th><th>aggregate ranking</th><th>warnings</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export interface QuadrantViewModel {
  cells: { quadrant: string; regulatory: string; support: string; note: string }[];
  point: { regulatory: number; support: number; quadrant: string; note: string };
}

export function quadrantViewModel(response: QuadrantResponse): QuadrantViewModel {
  return {
    cells: response.grid.map((cell) => ({
      quadrant: cell.quadrant,
      regulatory: cell.regulatory,
      support: cell.support,
      note: cell.strategy_note,
    })),
    point: {
      regulatory: response.position.regulatory_intensity,
      support: response.position.support_level,
      quadrant: response.position.quadrant,
      note: response.position.strategy_note,
    },
  };
}

export function renderQuadrantChart(vm: QuadrantViewModel): string {
  const cellOrder: Record<string, { x: number; y: number }> = {
    "low,high": { x: 0, y: 0 },
    "high,high": { x: 1, y: 0 },
    "low,low": { x: 0, y: 1 },
    "high,low": { x: 1, y: 1 },
  };
  const cells = vm.cells
    .map((cell) => {
      const pos = cellOrder[`${cell.regulatory},${cell.support}`];
      return (
        `<div class="quadrant-cell" data-quadrant="${cell.quadrant}" ` +
        `style="grid-column:${pos.x + 1};grid-row:${pos.y + 1}" ` +
        `title="${cell.note}">${cell.quadrant}</div>`
      );
    })
    .join("");
  return (
    `<div class="quadrant-chart" data-selected="${vm.point.quadrant}">` +
    `<div class="quadrant-grid">${cells}</div>` +
    `<div class="quadrant-note" data-note>` +
    `(${vm.point.regulatory}, ${vm.point.support}) → ${vm.point.quadrant}: ${vm.point.note}` +
    `</div></div>`
  );
}
