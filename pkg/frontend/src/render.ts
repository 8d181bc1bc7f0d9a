// Canvas drawing: top-down tile view, player marker, HUD counter, and the
// final blueprint screen. Pure drawing; no game logic lives here.

import type { GameClient } from './game.js';
import type { BlueprintResponse } from './types.js';

const TILE_COLORS: Record<string, string> = {
  '.': '#3c4250',
  '#': '#14161c',
  B: '#b8453a',
  S: '#3c6e4f',
};

const TIER_COLORS: Record<string, string> = {
  Deteriorated: '#b8453a',
  Neutral: '#c9a53a',
  Advanced: '#3c9e5f',
};

export function drawGame(ctx: CanvasRenderingContext2D, client: GameClient): void {
  const { canvas } = ctx;
  ctx.fillStyle = '#0b0c10';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!client.map) return;

  const map = client.map;
  const base = Math.min(canvas.width / (map.rows[0].length * map.cell_size),
                        canvas.height / (map.rows.length * map.cell_size));
  const scale = base * client.zoom;
  const px = client.pos.x * scale;
  const pz = client.pos.z * scale;
  const offX = canvas.width / 2 - px;
  const offZ = canvas.height / 2 - pz;

  ctx.save();
  ctx.translate(offX, offZ);
  const ts = map.cell_size * scale;
  for (let iz = 0; iz < map.rows.length; iz++) {
    for (let ix = 0; ix < map.rows[iz].length; ix++) {
      ctx.fillStyle = TILE_COLORS[map.rows[iz][ix]] ?? '#000';
      ctx.fillRect(ix * ts, iz * ts, ts + 0.5, ts + 0.5);
    }
  }
  // player dot with a heading tick (yaw 0 faces +z)
  ctx.fillStyle = '#e8e3d3';
  ctx.beginPath();
  ctx.arc(px, pz, Math.max(3, ts * 0.3), 0, Math.PI * 2);
  ctx.fill();
  const rad = (client.yaw * Math.PI) / 180;
  ctx.strokeStyle = '#e8e3d3';
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(px, pz);
  ctx.lineTo(px + Math.sin(rad) * ts * 0.5, pz + Math.cos(rad) * ts * 0.5);
  ctx.stroke();
  ctx.restore();

  drawHud(ctx, client);
}

function drawHud(ctx: CanvasRenderingContext2D, client: GameClient): void {
  // answer counter in red, top right
  ctx.font = 'bold 22px monospace';
  ctx.textAlign = 'right';
  ctx.fillStyle = '#e03b2f';
  ctx.fillText(`${client.answered}/${client.total}`, ctx.canvas.width - 16, 32);
  ctx.textAlign = 'left';
}

export function drawBlueprint(ctx: CanvasRenderingContext2D, client: GameClient): void {
  const bp = client.blueprint;
  const { canvas } = ctx;
  ctx.fillStyle = '#0e1a24';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!bp || !client.map) return;

  const mean = bp.attributes.reduce((acc, a) => acc + a.score, 0) / bp.attributes.length;
  const overall = mean < 40 ? 'Deteriorated' : mean <= 60 ? 'Neutral' : 'Advanced';

  // the city from above, tinted by the overall outcome
  const map = client.map;
  const area = Math.min(canvas.width * 0.55, canvas.height - 80);
  const ts = area / map.rows.length;
  const originX = 24;
  const originY = 48;
  for (let iz = 0; iz < map.rows.length; iz++) {
    for (let ix = 0; ix < map.rows[iz].length; ix++) {
      const glyph = map.rows[iz][ix];
      ctx.fillStyle = glyph === '#' ? TIER_COLORS[overall] : '#20303c';
      ctx.globalAlpha = glyph === '#' ? 0.85 : 1;
      ctx.fillRect(originX + ix * ts, originY + iz * ts, ts + 0.5, ts + 0.5);
    }
  }
  ctx.globalAlpha = 1;

  ctx.fillStyle = '#e8e3d3';
  ctx.font = 'bold 20px monospace';
  ctx.fillText('city blueprint', originX, 32);

  // attribute bars with scores, tier-colored
  const barX = originX + area + 48;
  let y = 72;
  ctx.font = '14px monospace';
  for (const attr of bp.attributes) {
    ctx.fillStyle = '#8b95a5';
    ctx.fillText(`${attr.name} ${attr.score} (${attr.tier})`, barX, y - 8);
    ctx.fillStyle = '#20303c';
    ctx.fillRect(barX, y, 220, 14);
    ctx.fillStyle = TIER_COLORS[attr.tier];
    ctx.fillRect(barX, y, (220 * attr.score) / 100, 14);
    y += 48;
  }

  ctx.fillStyle = '#8b95a5';
  ctx.fillText('your answers:', barX, y);
  y += 22;
  for (const a of bp.answers) {
    ctx.fillStyle = '#e8e3d3';
    ctx.fillText(`${a.question}: ${a.choice}`, barX, y);
    y += 20;
  }
}
