import init, { window_curves, gegenbauer_expansion, sample_path } from "./pkg/gp_dirichlet_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.x.length; i++) {
      if (!isFinite(s.y[i])) continue;
      xmin = Math.min(xmin, s.x[i]); xmax = Math.max(xmax, s.x[i]);
      ymin = Math.min(ymin, s.y[i]); ymax = Math.max(ymax, s.y[i]);
    }
  }
  if (opts.ymin !== undefined) ymin = opts.ymin;
  if (opts.ymax !== undefined) ymax = opts.ymax;
  if (ymax === ymin) { ymax += 1; ymin -= 1; }
  const X = (x) => pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad);
  const Y = (y) => h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad);
  ctx.strokeStyle = "#999"; ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(ymax.toPrecision(3), 2, pad);
  ctx.fillText(ymin.toPrecision(3), 2, h - pad);
  ctx.fillText(xmin.toPrecision(3), pad, h - 10);
  ctx.fillText(xmax.toPrecision(3), w - pad - 30, h - 10);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color || COLORS[k % COLORS.length];
    ctx.lineWidth = s.width || 1.5;
    ctx.beginPath();
    let started = false;
    for (let i = 0; i < s.x.length; i++) {
      if (!isFinite(s.y[i])) { started = false; continue; }
      if (started) ctx.lineTo(X(s.x[i]), Y(s.y[i])); else ctx.moveTo(X(s.x[i]), Y(s.y[i]));
      started = true;
    }
    ctx.stroke();
  });
}

function drawWindows() {
  const bands = Number($("w-bands").value);
  const n = 800;
  const v = window_curves(n, bands, $("w-cos").checked);
  const x = v.slice(0, n);
  const series = [];
  for (let j = 0; j < bands; j++) series.push({ x, y: v.slice((j + 1) * n, (j + 2) * n) });
  plot($("w-canvas"), series, { ymin: 0, ymax: 1.05 });
}

function drawExpansion() {
  try {
    const b = gegenbauer_expansion($("g-fn").value, Number($("g-nu").value), Number($("g-j").value));
    const x = [], y = [];
    for (let j = 1; j < b.length; j++) {
      if (b[j] > 0) { x.push(Math.log10(j)); y.push(Math.log10(b[j])); }
    }
    plot($("g-canvas"), [{ x, y }]);
    $("err").textContent = "";
  } catch (e) {
    $("err").textContent = String(e);
  }
}

function drawPath() {
  try {
    const jmax = Number($("s-j").value);
    const n = 1024;
    const v = sample_path($("s-kernel").value, jmax, n, BigInt($("s-seed").value));
    const x = v.slice(0, n);
    const band = Number($("s-band").value);
    $("s-band").max = String(jmax);
    $("s-band-label").textContent = band < 0 ? "all" : String(band);
    let series;
    if (band < 0) {
      series = [{ x, y: v.slice(n, 2 * n), color: "#000", width: 1.5 }];
    } else {
      series = [{ x, y: v.slice((band + 2) * n, (band + 3) * n), color: COLORS[band % COLORS.length] }];
    }
    plot($("s-canvas"), series);
    $("err").textContent = "";
  } catch (e) {
    $("err").textContent = String(e);
  }
}

await init();
drawWindows();
drawExpansion();
drawPath();
$("w-bands").addEventListener("input", drawWindows);
$("w-cos").addEventListener("change", drawWindows);
$("g-run").addEventListener("click", drawExpansion);
for (const id of ["s-kernel", "s-j", "s-seed", "s-band"]) $(id).addEventListener("input", drawPath);
