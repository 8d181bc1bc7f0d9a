// Client-side prediction mirrors the server's movement rules: destination
// cell check first, then per-axis wall slide. Keeping the rules identical
// minimizes 409 reconciliations.

import type { MapDocument } from './types.js';

export interface XZ {
  x: number;
  z: number;
}

export function cellOf(map: MapDocument, x: number, z: number): [number, number] {
  return [Math.floor(x / map.cell_size), Math.floor(z / map.cell_size)];
}

export function walkable(map: MapDocument, x: number, z: number): boolean {
  if (x < 0 || z < 0) return false;
  const ix = Math.floor(x / map.cell_size);
  const iz = Math.floor(z / map.cell_size);
  if (iz >= map.rows.length || ix >= map.rows[0].length) return false;
  return map.rows[iz][ix] !== '#';
}

export function boothCell(map: MapDocument): [number, number] {
  for (let iz = 0; iz < map.rows.length; iz++) {
    const ix = map.rows[iz].indexOf('B');
    if (ix >= 0) return [ix, iz];
  }
  throw new Error('map has no booth');
}

/** One predicted step with wall slide; dx/dz is the full displacement. */
export function slideStep(map: MapDocument, pos: XZ, dx: number, dz: number): XZ {
  const nx = pos.x + dx;
  const nz = pos.z + dz;
  if (walkable(map, nx, nz)) return { x: nx, z: nz };
  let x = pos.x;
  let z = pos.z;
  if (walkable(map, nx, z)) x = nx;
  if (walkable(map, x, nz)) z = nz;
  return { x, z };
}

/** Heading in degrees for a movement direction; 0 faces +z, 90 faces +x. */
export function headingOf(dx: number, dz: number, fallback: number): number {
  if (dx === 0 && dz === 0) return fallback;
  let yaw = (Math.atan2(dx, dz) * 180) / Math.PI;
  yaw = ((yaw % 360) + 360) % 360;
  return yaw >= 360 ? 0 : yaw;
}
