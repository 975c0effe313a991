import init, { bathProfile, runDynamics, compareInitialConditions } from "./pkg/spinboson_web.js";

const form = document.getElementById("params");
const status = document.getElementById("status");
const top = document.getElementById("plot-top");
const bottom = document.getElementById("plot-bottom");
const COLORS = ["#1f5fa8", "#c4452d", "#3a8f3a"];

function params() {
  const f = new FormData(form);
  return {
    s: Number(f.get("s")),
    alpha: Number(f.get("alpha")),
    delta: Number(f.get("delta")),
    modes: Math.round(Number(f.get("modes"))),
    tmax: Number(f.get("tmax")),
    polarized: f.get("initial") === "polarized",
  };
}

function extent(arrays) {
  let lo = Infinity, hi = -Infinity;
  for (const a of arrays) for (const v of a) { if (v < lo) lo = v; if (v > hi) hi = v; }
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

// series: [{x, y, label, dots}]
function plot(canvas, series, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, m = { l: 60, r: 15, t: 15, b: 40 };
  ctx.clearRect(0, 0, W, H);
  const [x0, x1] = extent(series.map((s) => s.x));
  const [y0, y1] = extent(series.map((s) => s.y));
  const px = (x) => m.l + ((x - x0) / (x1 - x0)) * (W - m.l - m.r);
  const py = (y) => H - m.b - ((y - y0) / (y1 - y0)) * (H - m.t - m.b);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(m.l, m.t, W - m.l - m.r, H - m.t - m.b);
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  for (let k = 0; k <= 4; k++) {
    const x = x0 + ((x1 - x0) * k) / 4, y = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 12, H - m.b + 16);
    ctx.fillText(y.toPrecision(3), 4, py(y) + 4);
  }
  ctx.fillText(xLabel, W / 2, H - 6);
  ctx.fillText(yLabel, 4, 12);

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[i % COLORS.length];
    if (s.dots) {
      for (let k = 0; k < s.x.length; k++) ctx.fillRect(px(s.x[k]) - 1, py(s.y[k]) - 1, 2, 2);
    } else {
      ctx.beginPath();
      for (let k = 0; k < s.x.length; k++) (k ? ctx.lineTo : ctx.moveTo).call(ctx, px(s.x[k]), py(s.y[k]));
      ctx.stroke();
    }
    if (s.label) ctx.fillText(s.label, W - m.r - 150, m.t + 16 + 16 * i);
  });
}

function busy(label, work) {
  status.textContent = label;
  // let the status paint before the synchronous run
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const msg = work();
      status.textContent = `${msg} (${((performance.now() - t0) / 1000).toFixed(2)} s)`;
    } catch (e) {
      status.textContent = `Error: ${e.message ?? e}`;
    }
  }, 20);
}

function showBath() {
  const p = params();
  busy("Discretizing…", () => {
    const b = bathProfile(p.s, p.alpha, p.modes, 4.0);
    plot(top, [{ x: b.omega, y: b.density, label: "J(ω)" }], "ω", "J(ω)");
    plot(bottom, [{ x: b.frequencies, y: b.couplings, label: "λ_l", dots: true }], "ω_l", "λ_l");
    return `Reorganization energy ${b.reorganizationEnergy.toFixed(4)} (discrete ${b.discreteReorganizationEnergy.toFixed(4)}), recurrence time ${b.recurrenceTime.toFixed(1)}`;
  });
}

function run() {
  const p = params();
  busy("Integrating…", () => {
    const d = runDynamics(p.s, p.alpha, p.delta, p.polarized, p.modes, p.tmax);
    plot(top, [{ x: d.times, y: d.pZ, label: "P_z" }], "t", "P_z");
    plot(bottom, [{ x: d.times, y: d.entropy, label: "S" }], "t", "entropy");
    return `${d.classification}; steady P_z ${d.steadyPZ.toFixed(4)}, steady S ${d.steadyEntropy.toFixed(4)}`;
  });
}

function compare() {
  const p = params();
  busy("Integrating both preparations…", () => {
    const c = compareInitialConditions(p.s, p.alpha, p.delta, p.modes, p.tmax);
    const f = c.factorized, q = c.polarized;
    plot(top, [
      { x: f.times, y: f.pZ, label: "factorized" },
      { x: q.times, y: q.pZ, label: "polarized" },
    ], "t", "P_z");
    plot(bottom, [
      { x: f.times, y: f.entropy, label: "factorized" },
      { x: q.times, y: q.entropy, label: "polarized" },
    ], "t", "entropy");
    return `max |ΔP_z| ${c.maxAbsDifference.toFixed(4)}; steady P_z ${f.steadyPZ.toFixed(4)} vs ${q.steadyPZ.toFixed(4)}`;
  });
}

await init();
document.getElementById("show-bath").onclick = showBath;
document.getElementById("run").onclick = run;
document.getElementById("compare").onclick = compare;
status.textContent = "Ready.";
showBath();
