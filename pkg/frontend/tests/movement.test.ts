import { describe, expect, it } from 'vitest';

import { boothCell, cellOf, headingOf, slideStep, walkable } from '../src/movement.js';
import { TEST_MAP } from './fake_server.js';

describe('walkable', () => {
  it('streets walkable, buildings and out-of-bounds not', () => {
    expect(walkable(TEST_MAP, 1.5, 1.5)).toBe(true);
    expect(walkable(TEST_MAP, 2.5, 2.5)).toBe(false); // building
    expect(walkable(TEST_MAP, -0.1, 1.5)).toBe(false);
    expect(walkable(TEST_MAP, 1.5, 99)).toBe(false);
  });
});

describe('slideStep', () => {
  it('takes a free destination directly', () => {
    expect(slideStep(TEST_MAP, { x: 1.5, z: 1.5 }, 0.8, 0)).toEqual({ x: 2.3, z: 1.5 });
  });

  it('slides along a wall on the free axis', () => {
    // heading diagonally into the building block below the top corridor
    const out = slideStep(TEST_MAP, { x: 2.5, z: 1.5 }, 0.5, 0.9);
    expect(out.x).toBeCloseTo(3.0, 12); // x is free along the corridor
    expect(out.z).toBe(1.5); // z is blocked by the building row
  });

  it('fully blocked keeps the position', () => {
    const out = slideStep(TEST_MAP, { x: 1.5, z: 1.5 }, -1.0, -1.0);
    expect(out).toEqual({ x: 1.5, z: 1.5 });
  });
});

describe('map helpers', () => {
  it('cellOf floors by cell size', () => {
    expect(cellOf(TEST_MAP, 5.9, 1.1)).toEqual([5, 1]);
  });

  it('finds the booth', () => {
    expect(boothCell(TEST_MAP)).toEqual([5, 5]);
  });
});

describe('headingOf', () => {
  it('faces +z at 0 and +x at 90', () => {
    expect(headingOf(0, 1, 7)).toBe(0);
    expect(headingOf(1, 0, 7)).toBe(90);
    expect(headingOf(0, -1, 7)).toBe(180);
    expect(headingOf(-1, 0, 7)).toBe(270);
  });

  it('keeps the fallback when standing still', () => {
    expect(headingOf(0, 0, 42)).toBe(42);
  });
});
