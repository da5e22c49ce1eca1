import init, { Swarm } from "./pkg/pipesim_demo.js";

const ROUTE_END = 0xffffffff;
const ROLE_COLORS = ["#555", "#d35400", "#8e44ad", "#2c3e50", "#bbb"];

const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const $ = (id) => document.getElementById(id);

let swarm = null;
let running = false;

function create() {
  if (swarm) swarm.free();
  swarm = new Swarm($("scenario").value, $("scheme").value, Number($("uavs").value), Number($("seed").value));
  draw();
}

function toPx(x, y) {
  const sx = canvas.width / swarm.width_m();
  const sy = canvas.height / swarm.height_m();
  return [x * sx, canvas.height - y * sy];
}

function drawCells(values, color) {
  const cols = swarm.cols();
  const rows = swarm.rows();
  const cw = canvas.width / cols;
  const ch = canvas.height / rows;
  for (const [i, a] of values) {
    const c = i % cols;
    const r = Math.floor(i / cols);
    ctx.fillStyle = color(a);
    ctx.fillRect(c * cw, canvas.height - (r + 1) * ch, cw + 0.5, ch + 0.5);
  }
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  if ($("heat").checked) {
    const ph = swarm.pheromone();
    let max = 0;
    for (const v of ph) max = Math.max(max, v);
    const cells = [];
    ph.forEach((v, i) => { if (v > 0) cells.push([i, Math.sqrt(v / (max || 1))]); });
    drawCells(cells, (a) => `rgba(39, 174, 96, ${0.85 * a})`);
  }
  if ($("masks").checked) {
    drawCells(Array.from(swarm.masked_cells(), (i) => [i, 1]), () => "rgba(231, 76, 60, 0.25)");
  }

  const pos = swarm.positions();
  const at = (id) => toPx(pos[2 * id], pos[2 * id + 1]);

  ctx.strokeStyle = "#2980b9";
  ctx.lineWidth = 2;
  let open = false;
  for (const id of swarm.routes()) {
    if (id === ROUTE_END) {
      ctx.stroke();
      open = false;
      continue;
    }
    const [x, y] = at(id);
    if (!open) {
      ctx.beginPath();
      ctx.moveTo(x, y);
      open = true;
    } else {
      ctx.lineTo(x, y);
    }
  }

  const t = swarm.targets();
  ctx.fillStyle = "#c0392b";
  for (let i = 0; i < t.length; i += 2) {
    const [x, y] = toPx(t[i], t[i + 1]);
    ctx.beginPath();
    ctx.arc(x, y, 7, 0, 2 * Math.PI);
    ctx.fill();
  }

  const roles = swarm.roles();
  roles.forEach((role, id) => {
    const [x, y] = at(id);
    ctx.fillStyle = ROLE_COLORS[role];
    if (role === 3) {
      ctx.fillRect(x - 6, y - 6, 12, 12);
    } else {
      ctx.beginPath();
      ctx.arc(x, y, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  });

  $("stats").textContent =
    `${swarm.scheme()}  t = ${swarm.time().toFixed(0)} / ${swarm.horizon()} s\n` +
    `routed flows  ${swarm.routed_flows()} / ${swarm.flows()}\n` +
    `active masks  ${swarm.mask_count()}\n` +
    `coverage      ${swarm.coverage().toFixed(1)} %`;
}

function frame() {
  if (!running) return;
  swarm.advance(Number($("pace").value));
  draw();
  if (swarm.finished()) {
    toggleRun();
    return;
  }
  requestAnimationFrame(frame);
}

function toggleRun() {
  running = !running;
  $("run").textContent = running ? "Pause" : "Run";
  if (running) requestAnimationFrame(frame);
}

await init();
$("step").onclick = () => { swarm.advance(10); draw(); };
$("run").onclick = toggleRun;
$("reset").onclick = create;
$("masks").onchange = draw;
$("heat").onchange = draw;
create();
