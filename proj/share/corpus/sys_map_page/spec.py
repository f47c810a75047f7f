def sys_map_page(old, pt, index, frm, perm):
    cond = z3.And(
        z3.ULT(pt, dt.NPAGE),
        z3.ULT(frm, dt.NPAGE),
        z3.ULT(index, dt.PAGE_WORDS),
        old.pages[pt].type == dt.page_type.PAGE_TYPE_X86_PT,
        old.pages[pt].owner == old.current,
        old.pages[frm].type == dt.page_type.PAGE_TYPE_FRAME)

    new = old.copy()
    new.pages[frm].refcnt = old.pages[frm].refcnt + 1
    new.pages[pt].data[index] = (frm << dt.PTE_ADDR_SHIFT) | perm
    return cond, util.If(cond, new, old)
