/**
 * Rectangular selections: conversion from displayed (zoomed) coordinates to
 * image pixel space, plus the client-side mirror of the server's marker
 * validation. Whatever zoom the image is shown at, submitted rects are in
 * image pixels.
 */

export interface Rect {
  x: number
  y: number
  w: number
  h: number
}

export interface Drag {
  x0: number
  y0: number
  x1: number
  y1: number
}

/** Displayed pixels per image pixel (> 1 means zoomed in). */
export function displayScale(displayedWidth: number, imageWidth: number): number {
  return imageWidth > 0 ? displayedWidth / imageWidth : 1
}

/** Normalize a drag (any corner order) and convert to image pixel space. */
export function dragToImageRect(drag: Drag, scale: number): Rect {
  const left = Math.min(drag.x0, drag.x1)
  const top = Math.min(drag.y0, drag.y1)
  const width = Math.abs(drag.x1 - drag.x0)
  const height = Math.abs(drag.y1 - drag.y0)
  return {
    x: left / scale,
    y: top / scale,
    w: width / scale,
    h: height / scale,
  }
}

/** Back-conversion for overlay placement at the current zoom. */
export function rectToDisplay(rect: Rect, scale: number): Rect {
  return { x: rect.x * scale, y: rect.y * scale, w: rect.w * scale, h: rect.h * scale }
}

export function clampRect(rect: Rect, imageWidth: number, imageHeight: number): Rect {
  const x = Math.max(0, Math.min(rect.x, imageWidth))
  const y = Math.max(0, Math.min(rect.y, imageHeight))
  const right = Math.max(0, Math.min(rect.x + rect.w, imageWidth))
  const bottom = Math.max(0, Math.min(rect.y + rect.h, imageHeight))
  return { x, y, w: right - x, h: bottom - y }
}

/**
 * Mirror of the server's InvalidRect checks; returns a message or null.
 * A null result means the server will accept the rect.
 */
export function validateRect(rect: Rect, imageWidth: number, imageHeight: number): string | null {
  if (rect.w <= 0 || rect.h <= 0) return 'selection is empty'
  const intersects =
    rect.x < imageWidth && rect.y < imageHeight && rect.x + rect.w > 0 && rect.y + rect.h > 0
  if (!intersects) return 'selection lies outside the image'
  return null
}

/** Drags shorter than this (displayed px) are clicks, not selections. */
export const MIN_DRAG_PX = 4

export function isRealDrag(drag: Drag): boolean {
  return Math.abs(drag.x1 - drag.x0) >= MIN_DRAG_PX && Math.abs(drag.y1 - drag.y0) >= MIN_DRAG_PX
}
