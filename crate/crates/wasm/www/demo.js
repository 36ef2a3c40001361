import init, { geometry_curve, sample_points_2d, fooling_field } from "./pkg/isocurse_wasm.js";

const $ = (id) => document.getElementById(id);
const GRID = 120;

// Slider position 0..100 maps to p in [1, 64], log-spaced.
function currentP() {
  if ($("p-inf").checked) return Infinity;
  return Math.exp(Math.log(64) * $("p").value / 100);
}

function fmt(x) {
  return Number.isFinite(x) ? x.toPrecision(3) : "∞";
}

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();
}

function drawCurve(p) {
  const c = $("curve"), ctx = c.getContext("2d");
  const dmax = Number($("dmax").value);
  const rows = geometry_curve(p, dmax);
  const pad = 40, w = c.width - 2 * pad, h = c.height - 2 * pad;
  const ymax = 2.0;
  const X = (d) => pad + w * (d - 1) / Math.max(dmax - 1, 1);
  const Y = (v) => pad + h * (1 - v / ymax);
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.fillStyle = "#555";
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  for (const v of [0, 0.5, 1, 1.5, 2]) ctx.fillText(v.toFixed(1), 8, Y(v) + 4);
  ctx.fillText("d = 1", pad, c.height - 12);
  ctx.fillText(`d = ${dmax}`, pad + w - 40, c.height - 12);
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#888";
  ctx.beginPath(); ctx.moveTo(pad, Y(Math.sqrt(3))); ctx.lineTo(pad + w, Y(Math.sqrt(3))); ctx.stroke();
  ctx.setLineDash([]);
  const line = (col, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let i = 0; i < rows.length; i += 4) {
      const x = X(rows[i]), y = Y(rows[i + col]);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
    ctx.lineWidth = 1;
  };
  line(2, "#1f6fb4");
  line(1, "#e07b00");
}

function drawScatter(p, seed) {
  const c = $("scatter"), ctx = c.getContext("2d");
  const pts = sample_points_2d(p, Number($("n").value), seed);
  axes(ctx, c.width, c.height);
  // D_p^2 always fits in [-1, 1]^2.
  const s = c.width / 2.2;
  ctx.fillStyle = "rgba(31, 111, 180, 0.45)";
  for (let i = 0; i < pts.length; i += 2) {
    ctx.fillRect(c.width / 2 + s * pts[i] - 1, c.height / 2 - s * pts[i + 1] - 1, 2, 2);
  }
}

function drawField(p, seed) {
  const c = $("field"), ctx = c.getContext("2d");
  const nodes = Number($("nodes").value);
  // First probe the default delta, then scale it.
  const probe = fooling_field(p, nodes, 0, 2, seed);
  const delta = probe[1] * 2 * Number($("dscale").value) / 100;
  const out = fooling_field(p, nodes, delta, GRID, seed);
  const rad = out[0];
  const pts = out.slice(2, 2 + 2 * nodes);
  const vals = out.slice(2 + 2 * nodes);
  const img = ctx.createImageData(GRID, GRID);
  for (let k = 0; k < vals.length; k++) {
    const v = vals[k];
    const o = 4 * k;
    if (Number.isNaN(v)) {
      img.data.set([255, 255, 255, 255], o);
    } else {
      img.data.set([255 * v, 80 + 120 * v, 255 * (1 - v), 255], o);
    }
  }
  const off = new OffscreenCanvas(GRID, GRID);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.drawImage(off, 0, 0, c.width, c.height);
  ctx.fillStyle = "#000";
  for (let i = 0; i < pts.length; i += 2) {
    const x = c.width * (pts[i] + rad) / (2 * rad);
    const y = c.height * (rad - pts[i + 1]) / (2 * rad);
    ctx.beginPath(); ctx.arc(x, y, 3, 0, 2 * Math.PI); ctx.fill();
  }
  $("field-info").textContent =
    `δ = ${delta.toPrecision(4)}, transition width δ√2 = ${(delta * Math.SQRT2).toPrecision(4)}; blue is 0, red is 1.`;
}

function render() {
  const p = currentP();
  const seed = Number($("seed").value) >>> 0;
  $("p-out").textContent = fmt(p);
  $("dmax-out").textContent = $("dmax").value;
  $("n-out").textContent = $("n").value;
  $("nodes-out").textContent = $("nodes").value;
  $("dscale-out").textContent = (2 * Number($("dscale").value) / 100).toFixed(2) + "×";
  $("error").textContent = "";
  try {
    drawCurve(p);
    drawScatter(p, seed);
    drawField(p, seed);
  } catch (e) {
    $("error").textContent = String(e);
  }
}

await init();
for (const el of document.querySelectorAll("input")) el.addEventListener("input", render);
render();
