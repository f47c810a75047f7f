def sys_reclaim_page(old, pn):
    cond = z3.And(
        z3.ULT(pn, dt.NPAGE),
        old.pages[pn].owner == old.current,
        old.pages[pn].type == dt.page_type.PAGE_TYPE_FRAME)

    new = old.copy()
    new.pages[pn].type = dt.page_type.PAGE_TYPE_FREE
    new.pages[pn].owner = z3.BitVecVal(0, 64)
    new.pages[pn].refcnt = old.pages[pn].refcnt - 1
    new.procs[old.current].nr_pages = old.procs[old.current].nr_pages - 1
    return cond, util.If(cond, new, old)
