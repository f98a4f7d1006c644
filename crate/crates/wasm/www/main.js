import init, { Demo } from "./pkg/wealthmap_wasm.js";

const $ = (id) => document.getElementById(id);
let demo = null;
let preview = null;
let marker = null;

function setStatus(text) {
  $("status").textContent = text;
}

function color(t) {
  // dark blue -> yellow
  const r = Math.round(20 + 235 * t), g = Math.round(30 + 200 * t), b = Math.round(90 - 60 * t);
  return `rgb(${r},${g},${b})`;
}

function toPixel(lat, lon) {
  const c = $("map");
  const x = ((lon - preview.west) / preview.cell_deg + 0.5) * (c.width / preview.cols);
  const y = ((preview.north - lat) / preview.cell_deg + 0.5) * (c.height / preview.rows);
  return [x, y];
}

function drawMap() {
  const c = $("map"), ctx = c.getContext("2d");
  const vals = preview.values.filter((v) => v !== null);
  const lo = Math.min(...vals), hi = Math.max(...vals);
  const cw = c.width / preview.cols, ch = c.height / preview.rows;
  preview.values.forEach((v, i) => {
    const r = Math.floor(i / preview.cols), k = i % preview.cols;
    ctx.fillStyle = v === null ? "#ccc" : color(Math.sqrt((v - lo) / (hi - lo || 1)));
    ctx.fillRect(k * cw, r * ch, Math.ceil(cw), Math.ceil(ch));
  });
  for (const cl of preview.clusters) {
    const [x, y] = toPixel(cl.lat, cl.lon);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.strokeStyle = "#fff";
    ctx.fillStyle = "#e33";
    cl.urban ? ctx.fill() : ctx.stroke();
  }
  if (marker) {
    const [x, y] = toPixel(marker.lat, marker.lon);
    const radiusDeg = Number($("radius").value) / 111320;
    ctx.beginPath();
    ctx.ellipse(x, y, radiusDeg / preview.cell_deg * cw / Math.cos(marker.lat * Math.PI / 180),
      radiusDeg / preview.cell_deg * ch, 0, 0, 2 * Math.PI);
    ctx.strokeStyle = "#0f0";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function table(el, rows) {
  el.innerHTML = rows.map((r, i) => {
    const tag = i === 0 ? "th" : "td";
    return "<tr>" + r.map((x) => `<${tag}>${x}</${tag}>`).join("") + "</tr>";
  }).join("");
}

function fmt(x) {
  return typeof x === "number" ? (Number.isInteger(x) ? String(x) : x.toFixed(4)) : x;
}

function runZonal() {
  if (!marker) return;
  drawMap();
  try {
    const z = JSON.parse(demo.zonal($("raster").value, marker.lat, marker.lon, Number($("radius").value)));
    table($("zonal"), [["statistic", "value"], ["center", `${marker.lat.toFixed(3)}, ${marker.lon.toFixed(3)}`],
      ...["cells", "count", "mean", "max", "min", "variance", "skewness", "kurtosis"].map((k) => [k, fmt(z[k])])]);
  } catch (e) {
    table($("zonal"), [["statistic", "value"], ["error", String(e)]]);
  }
}

function drawScatter(w) {
  const c = $("scatter"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const xs = w.clusters.map((r) => r[2]), ys = w.clusters.map((r) => r[1]);
  const sx = (v) => 30 + (v - Math.min(...xs)) / (Math.max(...xs) - Math.min(...xs)) * (c.width - 40);
  const sy = (v) => c.height - 30 - (v - Math.min(...ys)) / (Math.max(...ys) - Math.min(...ys)) * (c.height - 40);
  ctx.fillStyle = "#36c";
  w.clusters.forEach((r) => ctx.fillRect(sx(r[2]) - 2, sy(r[1]) - 2, 4, 4));
  ctx.fillStyle = "#222";
  ctx.fillText("latent wealth", c.width / 2 - 30, c.height - 8);
  ctx.save();
  ctx.translate(12, c.height / 2 + 30);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText("wealth index", 0, 0);
  ctx.restore();
  ctx.fillText(`r = ${w.correlation.toFixed(3)}`, 40, 20);
  table($("loadings"), [["asset", "loading"], ...w.assets.map((a, i) => [a, fmt(w.loadings[i])]),
    ["explained share", fmt(w.explained_share)]]);
}

function drawForce() {
  const f = JSON.parse(demo.forcePlot(Number($("cluster").value)));
  const c = $("force"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const arrows = f.arrows.slice(0, 12);
  let lo = f.base_value, hi = f.base_value, acc = f.base_value;
  for (const a of arrows) { acc += a.contribution; lo = Math.min(lo, acc); hi = Math.max(hi, acc); }
  lo = Math.min(lo, f.prediction); hi = Math.max(hi, f.prediction);
  const pad = (hi - lo) * 0.1 || 1;
  const sx = (v) => 220 + (v - lo + pad) / (hi - lo + 2 * pad) * (c.width - 240);
  const rowH = 20;
  ctx.font = "12px system-ui";
  acc = f.base_value;
  arrows.forEach((a, i) => {
    const y = 30 + i * rowH;
    const x0 = sx(acc), x1 = sx(acc + a.contribution);
    ctx.fillStyle = a.direction === "increase" ? "#d33" : "#27c";
    ctx.fillRect(Math.min(x0, x1), y, Math.max(Math.abs(x1 - x0), 1), rowH - 4);
    ctx.fillStyle = "#222";
    ctx.fillText(`${a.feature} = ${fmt(a.feature_value)}`, 4, y + 12);
    acc += a.contribution;
  });
  const bottom = 30 + arrows.length * rowH;
  for (const [v, label] of [[f.base_value, "base"], [f.prediction, "prediction"]]) {
    ctx.strokeStyle = "#555";
    ctx.beginPath();
    ctx.moveTo(sx(v), 20);
    ctx.lineTo(sx(v), bottom);
    ctx.stroke();
    ctx.fillText(`${label} ${v.toFixed(3)}`, sx(v) - 30, label === "base" ? 14 : bottom + 14);
  }
  ctx.fillText(`${f.cluster_id}: observed ${f.observed.toFixed(3)}; ${f.arrows.length} nonzero contributions` +
    (f.arrows.length > 12 ? " (top 12 shown)" : ""), 4, c.height - 8);
}

function rebuild() {
  setStatus("training...");
  // Let the status paint before the synchronous work starts.
  setTimeout(() => {
    try {
      const t0 = performance.now();
      demo?.free();
      demo = new Demo(BigInt($("seed").value), Number($("nclusters").value), 60);
      $("raster").innerHTML = demo.rasterNames().map((n) => `<option>${n}</option>`).join("");
      preview = JSON.parse(demo.preview($("raster").value));
      $("cluster").innerHTML = preview.clusters.map((c, i) => `<option value="${i}">${c.id}</option>`).join("");
      marker = null;
      table($("zonal"), []);
      drawMap();
      drawScatter(JSON.parse(demo.wealthIndex()));
      drawForce();
      setStatus(`ready (${Math.round(performance.now() - t0)} ms)`);
    } catch (e) {
      setStatus(String(e));
    }
  }, 20);
}

$("map").addEventListener("click", (ev) => {
  const c = $("map"), r = c.getBoundingClientRect();
  const col = (ev.clientX - r.left) / (c.width / preview.cols) - 0.5;
  const row = (ev.clientY - r.top) / (c.height / preview.rows) - 0.5;
  marker = { lat: preview.north - row * preview.cell_deg, lon: preview.west + col * preview.cell_deg };
  runZonal();
});
$("raster").addEventListener("change", () => {
  preview = JSON.parse(demo.preview($("raster").value));
  drawMap();
  runZonal();
});
$("radius").addEventListener("change", runZonal);
$("cluster").addEventListener("change", drawForce);
$("regen").addEventListener("click", rebuild);

await init();
rebuild();
